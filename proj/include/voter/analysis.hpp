#pragma once

// Chain analysis: spectral gap of -q (reversible case), worst-row total
// variation distance to pi and the mixing time at threshold 1/(2e),
// bottleneck ratios with exhaustive / 1-d interval optimizers, the Cheeger
// lower bound g >= Phi_*^2 / 2, and the per-instance condition report.

#include <vector>

#include "voter/kernel.hpp"

namespace vm {

// Second smallest eigenvalue of -q, computed on the symmetrized matrix
// S = D^{1/2}(-q)D^{-1/2}, D = diag(pi).  Dense eigensolve up to n = 4096;
// Lanczos with the sqrt(pi) null vector deflated above that.  Refuses
// non-reversible kernels (NotReversible).
double spectral_gap(const Kernel& k);

// The Lanczos path regardless of size (exposed for cross-checking against
// the dense route on small kernels).
double spectral_gap_lanczos(const Kernel& k);

// d_E(t) = max_x ||q_t(x,.) - pi||_TV by uniformization; dense rows capped
// at n = 4096 (TooLarge).  Verified translation invariance collapses the
// max to the single row x = 0.
double tv_distance(const Kernel& k, double t);

// Smallest t with d_E(t) <= 1/(2e), by doubling bracket + bisection to
// relative tolerance 1e-6 (d_E is nonincreasing).
double mixing_time(const Kernel& k);

constexpr double kMixingThreshold = 0.18393972058572117;  // 1/(2e)

// Phi(S) = sum_{x in S, y not in S} pi(x) q(x,y) / pi(S).
double bottleneck_ratio(const Kernel& k, const std::vector<int>& sites);

enum class BottleneckStrategy { exhaustive, intervals_1d };

struct BottleneckResult {
  double phi = 0.0;
  std::vector<int> witness;
};

// Minimal Phi(S) over nonempty S with pi(S) <= 1/2.  `exhaustive` enumerates
// all subsets (n <= 22); `intervals_1d` scans the contiguous intervals I_k,
// 1 <= k <= floor(n/2), valid for 1-d translation-invariant kernels where
// the interval family attains the optimum.
BottleneckResult bottleneck_optimum(const Kernel& k, BottleneckStrategy strategy);

struct CheegerResult {
  double gap = 0.0;
  double phi_star = 0.0;
  bool bound_ok = false;  // gap >= phi_star^2 / 2 - 1e-9
};

CheegerResult cheeger_check(const Kernel& k);

// Scalar summary of the two sufficient conditions for diffusive density
// behaviour: (i) pi_diag -> 0 and t_mix/t_meet -> 0; (ii) reversible,
// pi_diag -> 0 and log(e v t_meet pi_max q_max)/(g t_meet) -> 0.  For a
// single instance these are descriptive numbers; trend verdicts across a
// size ladder live in the experiment runner.
struct ConditionReport {
  double pi_diag = 0.0;
  double pi_max = 0.0;
  double q_max = 0.0;
  double gap = 0.0;      // NaN when not reversible
  double t_mix = 0.0;
  double t_meet = 0.0;
  double ratio_mix = 0.0;   // t_mix / t_meet
  double gap_tmeet = 0.0;   // g * t_meet (NaN when not reversible)
  double logterm = 0.0;     // log(e v t_meet pi_max q_max)/(g t_meet), NaN if not reversible
  bool reversible = false;
  bool flag_i = false;   // heuristic: pi_diag and ratio_mix both small
  bool flag_ii = false;  // heuristic: reversible and pi_diag, logterm small
};

ConditionReport condition_report(const Kernel& k, double t_meet);

}  // namespace vm
