#pragma once

// Exact meeting-time computations on the product chain: two independent
// copies of the kernel chain run until they occupy the same site, with the
// diagonal absorbing.  Moments come from dense linear solves
//   (-Q) h1 = 1,   (-Q) h2 = 2 h1
// over the transient (off-diagonal) states; tails from the absorbing
// semigroup.  For verified translation-invariant kernels the pair collapses
// to the single difference walk (rate q(0,s) + q(0,-s) for step s, absorbed
// at 0), which handles tori far beyond the dense product cap.
//
// Also here: the exact dual pair expectations (voter-model moments equal
// weighted survival functionals of the pair chain) and the numeric checks
// of the mixing-based pair-correlation bounds.

#include <cstdint>
#include <vector>

#include "voter/kernel.hpp"

namespace vm {

struct MeetingSolution {
  int n = 0;
  bool reduced = false;  // difference-walk route?
  GroupHint group;       // set when reduced

  double t_meet = 0.0;      // E[M] from two independent pi starts
  double mvv_mean = 0.0;    // E[M] from a pair-measure start
  double mvv_second = 0.0;  // E[M^2] from a pair-measure start

  // Full route: n*n row-major table (diagonal 0).  Reduced route: value per
  // group difference (entry 0 is 0).
  std::vector<double> h1_store;
  std::vector<double> h2_store;

  double mean_meeting(int x, int y) const;
  double second_moment(int x, int y) const;
};

// Route chosen automatically: difference walk when the kernel's group is
// verified (n <= 4096 states), dense product otherwise (n <= 64).
MeetingSolution meeting_moments(const Kernel& k);
MeetingSolution meeting_moments_full(const Kernel& k);
MeetingSolution meeting_moments_reduced(const Kernel& k);

// Residuals of the exact first/second moment identities and the variance
// lower bound on the expected meeting time.
struct IdentityRecord {
  double mvv_mean_target = 0.0;    // (1 - pi_diag) / (2 nu_total)
  double mvv_mean_residual = 0.0;  // relative
  double tmeet_target = 0.0;       // nu_total * E[M_vv^2]
  double tmeet_residual = 0.0;     // relative
  double lower_bound = 0.0;        // (1/nu_total)((1 - pi_diag)/2)^2
  bool lower_bound_ok = false;
};

IdentityRecord identity_check(const Kernel& k, const MeetingSolution& sol);

// P(M > t) on an ascending grid; UU = independent pi starts (atom at t=0
// when the draws coincide), VV = pair-measure start (never coincides).
std::vector<double> meeting_tail(const Kernel& k, PairKind which,
                                 const std::vector<double>& times);

// The two tails obey
//   P(M_uu > t) = 1 - pi_diag - 2 nu_total * int_0^t P(M_vv > s) ds.
// Evaluates both sides on the grid (integral by composite Simpson with
// midpoint refinement) and returns the pointwise residuals.
struct TailRelationRecord {
  double max_residual = 0.0;
  std::vector<double> residual;
};

TailRelationRecord tail_relation_check(const Kernel& k, const std::vector<double>& times);

// Markov-inequality sanity on the grid: 2 nu_total t P(M_vv > t) <= 1 - pi_diag.
bool tail_markov_bound_ok(const Kernel& k, const std::vector<double>& times,
                          double slack = 1e-9);

enum class DualObservable { p1p0, p10, p01 };

// Joint law of the two walkers at time t on the absorbing product chain
// (n*n row-major; diagonal entries carry the absorbed mass), started from
// pi x pi (UU) or the pair measure (VV).  Dense product route only.
std::vector<double> dual_pair_distribution(const Kernel& k, PairKind which, double t);

// Exact voter-model expectations by duality: for a fixed configuration xi,
//   E_xi[p1p0(t)] = E[ xi(A_t)(1-xi(B_t)); not yet met ]   (UU start)
//   E_xi[p10(t)]  = same weight, pair-measure start; p01 mirrored.
double dual_pair_expectation(const Kernel& k, const std::vector<std::uint8_t>& xi,
                             DualObservable which, double t);

// Margin check of the two pair-correlation decoupling bounds: for 0 < s < t,
//   |E_xi[p10(t)] - P(M_vv > s) p1(xi)p0(xi)|
//     <= P(M_vv in (s,t]) + 4 P(M_vv > s) d_E(t-s)               (basic)
//     <= P(M_vv in (s,t]) + (2 pi_max q_max / nu_total) e^{-g(t-s)}  (reversible)
struct PairBoundRecord {
  double tail_s = 0.0;
  double tail_t = 0.0;
  double d_e = 0.0;   // d_E(t - s)
  double gap = 0.0;   // NaN when not reversible
  std::vector<double> lhs;
  std::vector<double> bound_basic;
  std::vector<double> margin_basic;
  std::vector<double> bound_reversible;  // empty when not reversible
  std::vector<double> margin_reversible;
  double min_margin_basic = 0.0;
  double min_margin_reversible = 0.0;  // NaN when not reversible
};

PairBoundRecord pair_correlation_bound_check(const Kernel& k, double s, double t,
                                             const std::vector<std::vector<std::uint8_t>>& configs);

// Default configuration battery: every configuration for n <= 12, otherwise
// `sampled` Bernoulli(1/2) draws from a fixed stream plus both consensus
// states.
std::vector<std::vector<std::uint8_t>> default_bound_configs(const Kernel& k,
                                                             std::uint64_t seed = 9000001,
                                                             int sampled = 256);

}  // namespace vm
