#pragma once

// Wright-Fisher diffusion reference values via moment duality with the
// Kingman death chain (pure death from j to j-1 at rate j(j-1)/2):
//   E_u[Y_t^k] = E_k[u^{D_t}].
// Two independent evaluation routes are kept on purpose: the closed-form
// eigen-expansion (distinct rational eigenvalues, evaluated in quadruple
// precision because the coefficients alternate violently by k ~ 100), and
// plain uniformization of the bidiagonal generator.  They must agree to
// 1e-12; tests enforce it.

#include <cstdint>
#include <vector>

#include "voter/rng.hpp"

namespace vm {

// k-th moment of the Wright-Fisher diffusion at time t from Y_0 = u,
// closed-form eigen route.  k capped at 100 (Overflow above).
double wf_moment(double u, int k, double t);

// Law of the death chain at time t started from k: vector of P(D_t = j),
// j = 1..k (index j-1), by uniformization.
std::vector<double> death_chain_dist(int k, double t);

// Sample D_t by accumulating the exponential holding times.
int death_chain_sample(int k, double t, Rng& rng);

// CDF of the limit law for scaled meeting times: an atom of mass delta at 0
// plus a standard exponential: delta + (1 - delta)(1 - e^{-t}).
double mixture_cdf(double delta, double t);

struct WfTrajectory {
  std::vector<double> times;
  std::vector<double> values;
  bool absorbed = false;
  double final_value = 0.0;
};

// Euler-Maruyama diagnostic (dY = sqrt(Y(1-Y)) dW, clamped to [0,1] with
// boundary absorption).  Requires dt <= 1e-3 * T.  A sanity tool only; the
// moment duality above is the oracle.
WfTrajectory wf_simulate(double u, double t_final, double dt, Rng& rng);

}  // namespace vm
