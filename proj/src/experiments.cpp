#include "voter/experiments.hpp"

#include <cmath>

#include "voter/errors.hpp"
#include "voter/parallel.hpp"

namespace vm {

GammaResolved resolve_gamma(const Kernel& k, const GammaPolicy& policy,
                            std::uint64_t master_seed, unsigned threads) {
  GammaResolved out;
  if (!policy.use_tmeet) {
    require(policy.explicit_value > 0.0, "ConfigError",
            "explicit gamma must be positive");
    out.gamma = policy.explicit_value;
    out.source = "explicit";
    return out;
  }
  try {
    out.gamma = meeting_moments(k).t_meet;
    out.source = "exact";
    return out;
  } catch (const Error& e) {
    if (e.code() != std::string("TooLarge")) throw;
  }
  MeanSe ms = mean_se(meeting_samples(k, 4000, master_seed, threads));
  out.gamma = ms.mean;
  out.se = ms.se;
  out.source = "monte-carlo";
  return out;
}

std::vector<double> meeting_samples(const Kernel& k, long long n,
                                    std::uint64_t master_seed, unsigned threads) {
  return partial_coalescence_samples(k, 2, 1, n, master_seed, threads);
}

std::vector<double> partial_coalescence_samples(const Kernel& k, int lineages, int level,
                                                long long n, std::uint64_t master_seed,
                                                unsigned threads) {
  require(n >= 1, "BadParam", "need at least one sample");
  std::vector<double> out(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    Rng rng = Rng::for_replica(master_seed, i);
    out[i] = run_partial(k, lineages, level, rng).time_to(level);
  });
  return out;
}

std::vector<double> full_coalescence_samples(const Kernel& k, int level, long long n,
                                             std::uint64_t master_seed, unsigned threads) {
  require(n >= 1, "BadParam", "need at least one sample");
  std::vector<double> out(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    Rng rng = Rng::for_replica(master_seed, i);
    out[i] = run_full(k, level, rng).time_to(level);
  });
  return out;
}

std::vector<double> kingman_reference_samples(int k, int j, long long n,
                                              std::uint64_t master_seed) {
  require(n >= 1, "BadParam", "need at least one sample");
  Rng rng(derive_stream_seed(master_seed, 0));
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = kingman_sampler(k, j, rng);
  return out;
}

DensityMomentCheck density_moment_check(const Kernel& k, const SimContext& ctx, double u,
                                        double gamma, const std::vector<double>& grid,
                                        long long replicas, std::uint64_t master_seed,
                                        unsigned threads) {
  require(!grid.empty(), "BadParam", "need a nonempty grid");
  double horizon = grid.back();
  DensityMomentCheck out;
  out.summary = ensemble(ctx, u, gamma, horizon, grid, replicas, master_seed, threads);

  std::vector<double> real_times(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) real_times[i] = gamma * grid[i];
  std::vector<double> tail = meeting_tail(k, PairKind::UU, real_times);

  auto zscore = [](double dev, double se) {
    if (dev == 0.0) return 0.0;
    return dev / std::max(se, 1e-300);
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    MomentCheckPoint p2;
    p2.s = grid[i];
    p2.mean = out.summary.mean_p1p0[i];
    p2.se = out.summary.se_p1p0[i];
    p2.target = u * (1.0 - u) * tail[i];
    p2.z = zscore(p2.mean - p2.target, p2.se);
    out.second_moment.push_back(p2);
    out.max_abs_z_second = std::max(out.max_abs_z_second, std::fabs(p2.z));

    MomentCheckPoint pm;
    pm.s = grid[i];
    pm.mean = out.summary.mean_p1[i];
    pm.se = out.summary.se_p1[i];
    pm.target = u;
    pm.z = zscore(pm.mean - pm.target, pm.se);
    out.martingale.push_back(pm);
    out.max_abs_z_martingale = std::max(out.max_abs_z_martingale, std::fabs(pm.z));
  }
  return out;
}

ResidualStat residual_stat(const Kernel& k, const SimContext& ctx, double u, double gamma,
                           double horizon, long long replicas, std::uint64_t master_seed,
                           unsigned threads) {
  (void)k;
  EnsembleSummary s = ensemble(ctx, u, gamma, horizon, {}, replicas, master_seed, threads);
  ResidualStat out;
  out.mean_abs = s.mean_abs_residual;
  out.se_abs = s.se_abs_residual;
  out.mean = s.mean_residual;
  out.se = s.se_residual;
  out.replicas = replicas;
  out.gamma = gamma;
  return out;
}

}  // namespace vm
