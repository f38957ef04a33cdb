#pragma once

// Statistical experiment primitives shared by the config-driven runner and
// the acceptance battery: Monte Carlo sample generators (one replica = one
// derived stream), moment checks against exact dual targets, and the
// time-scale resolution policy.  Everything here is deterministic in
// (master_seed, parameters) regardless of thread count.

#include <cstdint>
#include <string>
#include <vector>

#include "voter/coalescent_sim.hpp"
#include "voter/exact_meeting.hpp"
#include "voter/kernel.hpp"
#include "voter/stats.hpp"
#include "voter/voter_sim.hpp"

namespace vm {

struct GammaPolicy {
  bool use_tmeet = true;        // otherwise take explicit_value
  double explicit_value = 0.0;  // gamma when use_tmeet is false
};

struct GammaResolved {
  double gamma = 0.0;
  double se = 0.0;  // nonzero only for the Monte Carlo fallback
  std::string source;  // "exact", "monte-carlo", or "explicit"
};

// t_meet from the exact solver when the kernel fits its caps, otherwise the
// mean of 4000 simulated pair meetings (SE recorded so callers can widen
// tolerances).
GammaResolved resolve_gamma(const Kernel& k, const GammaPolicy& policy,
                            std::uint64_t master_seed, unsigned threads);

// Meeting time of two coalescing pi-i.i.d. walkers, one sample per replica
// (zero when the starts collide).
std::vector<double> meeting_samples(const Kernel& k, long long n,
                                    std::uint64_t master_seed, unsigned threads);

// First time `lineages` pi-i.i.d. coalescing walkers are down to `level`.
std::vector<double> partial_coalescence_samples(const Kernel& k, int lineages, int level,
                                                long long n, std::uint64_t master_seed,
                                                unsigned threads);

// First time the all-sites system is down to `level` blocks.
std::vector<double> full_coalescence_samples(const Kernel& k, int level, long long n,
                                             std::uint64_t master_seed, unsigned threads);

// Kingman block-counting times k -> j (k = kKingmanInfinite for the
// entrance law), one serial stream.
std::vector<double> kingman_reference_samples(int k, int j, long long n,
                                              std::uint64_t master_seed);

struct MomentCheckPoint {
  double s = 0.0;       // grid time, gamma-units
  double mean = 0.0;    // ensemble mean
  double se = 0.0;
  double target = 0.0;  // exact dual value
  double z = 0.0;       // (mean - target) / se
};

struct DensityMomentCheck {
  EnsembleSummary summary;
  std::vector<MomentCheckPoint> second_moment;  // E[p1 p0] vs u(1-u) P(M_uu > gamma s)
  std::vector<MomentCheckPoint> martingale;     // mean p1 vs u
  double max_abs_z_second = 0.0;
  double max_abs_z_martingale = 0.0;
};

DensityMomentCheck density_moment_check(const Kernel& k, const SimContext& ctx, double u,
                                        double gamma, const std::vector<double>& grid,
                                        long long replicas, std::uint64_t master_seed,
                                        unsigned threads);

struct ResidualStat {
  double mean_abs = 0.0, se_abs = 0.0;
  double mean = 0.0, se = 0.0;
  long long replicas = 0;
  double gamma = 0.0;
};

// E|R(T)| for the mean-field condition ladders.
ResidualStat residual_stat(const Kernel& k, const SimContext& ctx, double u, double gamma,
                           double horizon, long long replicas, std::uint64_t master_seed,
                           unsigned threads);

}  // namespace vm
