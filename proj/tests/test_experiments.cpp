#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "voter/errors.hpp"
#include "voter/exact_meeting.hpp"
#include "voter/experiments.hpp"
#include "voter/graph_zoo.hpp"
#include "voter/stats.hpp"
#include "voter/voter_sim.hpp"

using namespace vm;

TEST_CASE("time-scale resolution: exact, explicit, and simulated fallbacks") {
  Kernel k = moran(10);
  GammaPolicy tmeet;
  GammaResolved exact = resolve_gamma(k, tmeet, 1, 1);
  CHECK(exact.source == "exact");
  CHECK(exact.gamma == doctest::Approx(4.05).epsilon(1e-12));
  CHECK(exact.se == 0.0);

  GammaPolicy fixed;
  fixed.use_tmeet = false;
  fixed.explicit_value = 2.5;
  GammaResolved ex = resolve_gamma(k, fixed, 1, 1);
  CHECK(ex.source == "explicit");
  CHECK(ex.gamma == 2.5);

  // No verified group and more than 64 sites: only the simulated route fits.
  Kernel big = random_regular_perm(70, 4, 2);
  GammaResolved mc = resolve_gamma(big, tmeet, 99, 1);
  CHECK(mc.source == "monte-carlo");
  CHECK(mc.se > 0.0);
  CHECK(mc.gamma > 0.0);
}

TEST_CASE("pair meeting samples follow the exact law on a solvable kernel") {
  // Three-site mean field: an atom of mass 1/3 at zero (the two draws
  // collide), and Exp(1) given a distinct start. The KS statistic assumes a
  // continuous law, so test the two pieces separately.
  Kernel k = moran(3);
  std::vector<double> sample = meeting_samples(k, 1500, 314159, 1);
  REQUIRE(sample.size() == 1500);

  int zeros = 0;
  std::vector<double> positives;
  for (double t : sample) {
    if (t == 0.0)
      ++zeros;
    else
      positives.push_back(t);
  }
  double freq = zeros / 1500.0;
  CHECK(std::abs(freq - 1.0 / 3.0) <= 4.0 * std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / 1500.0));

  KsResult ks = ks_one_sample(positives, [](double t) { return 1.0 - std::exp(-t); });
  CHECK(ks.pass);
}

TEST_CASE("replica streams make every sampler thread-count invariant") {
  Kernel k = torus_nn(4, 2);
  CHECK(meeting_samples(k, 300, 7, 1) == meeting_samples(k, 300, 7, 3));
  CHECK(partial_coalescence_samples(k, 3, 1, 200, 11, 1) ==
        partial_coalescence_samples(k, 3, 1, 200, 11, 4));
  CHECK(full_coalescence_samples(k, 2, 100, 13, 1) ==
        full_coalescence_samples(k, 2, 100, 13, 2));
  CHECK(kingman_reference_samples(5, 2, 500, 17) == kingman_reference_samples(5, 2, 500, 17));
}

TEST_CASE("higher stopping levels are reached no later, path by path") {
  // Same master seed: each replica's path prefix is shared, so the first
  // time down to 2 blocks can never exceed the first time down to 1.
  Kernel k = moran(6);
  std::vector<double> to2 = full_coalescence_samples(k, 2, 150, 2025, 1);
  std::vector<double> to1 = full_coalescence_samples(k, 1, 150, 2025, 1);
  REQUIRE(to2.size() == to1.size());
  for (std::size_t i = 0; i < to1.size(); ++i) CHECK(to2[i] <= to1[i] + 1e-15);
}

TEST_CASE("block-counting reference sampler hits the ladder mean") {
  std::vector<double> s = kingman_reference_samples(3, 1, 3000, 112233);
  MeanSe m = mean_se(s);
  CHECK(std::abs(m.mean - 4.0 / 3.0) <= 4.0 * m.se);
}

TEST_CASE("density moment check wires the exact dual targets in") {
  Kernel k = moran(12);
  SimContext ctx = SimContext::make(k);
  double gamma = meeting_moments(k).t_meet;
  std::vector<double> grid = {0.5, 1.0};
  DensityMomentCheck chk = density_moment_check(k, ctx, 0.5, gamma, grid, 300, 9090, 1);

  REQUIRE(chk.second_moment.size() == 2);
  REQUIRE(chk.martingale.size() == 2);
  std::vector<double> tails = meeting_tail(k, PairKind::UU, {0.5 * gamma, gamma});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(chk.second_moment[i].s == grid[i]);
    CHECK(chk.second_moment[i].target == doctest::Approx(0.25 * tails[i]).epsilon(1e-10));
    CHECK(chk.martingale[i].target == 0.5);
    CHECK(std::abs(chk.second_moment[i].z) <= chk.max_abs_z_second + 1e-15);
    CHECK(std::abs(chk.martingale[i].z) <= chk.max_abs_z_martingale + 1e-15);
  }
  // Deterministic seed; the simulation genuinely tracks the duals.
  CHECK(chk.max_abs_z_second < 4.0);
  CHECK(chk.max_abs_z_martingale < 4.0);
  CHECK(chk.summary.replicas == 300);
}

TEST_CASE("residual statistics: one-sided sign on the mean-field family") {
  // Every path satisfies R = -(1/n) int p1p0, so the mean is exactly the
  // negated absolute mean.
  Kernel k = moran(8);
  SimContext ctx = SimContext::make(k);
  double gamma = meeting_moments(k).t_meet;
  ResidualStat rs = residual_stat(k, ctx, 0.5, gamma, 2.0, 200, 777, 1);
  CHECK(rs.replicas == 200);
  CHECK(rs.gamma == doctest::Approx(gamma).epsilon(1e-15));
  CHECK(rs.mean_abs > 0.0);
  CHECK(rs.mean == doctest::Approx(-rs.mean_abs).epsilon(1e-15));
  CHECK(rs.se_abs > 0.0);
  CHECK(rs.se == doctest::Approx(rs.se_abs).epsilon(1e-12));
}
