#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "voter/errors.hpp"
#include "voter/exact_meeting.hpp"
#include "voter/graph_zoo.hpp"
#include "voter/kernel.hpp"

using namespace vm;

TEST_CASE("two-state meeting moments by hand") {
  // Two independent walkers meet at rate 2 once they differ: M_vv ~ Exp(2).
  Kernel k = build_from_rates(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  MeetingSolution sol = meeting_moments(k);
  CHECK(sol.t_meet == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(sol.mvv_mean == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(sol.mvv_second == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(sol.mean_meeting(0, 0) == 0.0);
  CHECK(sol.mean_meeting(0, 1) == doctest::Approx(0.5).epsilon(1e-13));

  IdentityRecord id = identity_check(k, sol);
  CHECK(std::abs(id.mvv_mean_residual) <= 1e-12);
  CHECK(std::abs(id.tmeet_residual) <= 1e-12);
  CHECK(id.lower_bound == doctest::Approx(0.125).epsilon(1e-13));
  CHECK(id.lower_bound_ok);
}

TEST_CASE("three-site mean-field: exponential meeting time, both moments") {
  // From distinct sites each walker jumps at rate 1 and lands on the other
  // with probability 1/2, so the meeting rate is exactly 1.
  Kernel k = moran(3);
  MeetingSolution sol = meeting_moments(k);
  CHECK(sol.t_meet == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(sol.mvv_mean == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(sol.mvv_second == doctest::Approx(2.0).epsilon(1e-13));

  std::vector<double> grid = {0.5, 1.0, 2.0};
  std::vector<double> vv = meeting_tail(k, PairKind::VV, grid);
  std::vector<double> uu = meeting_tail(k, PairKind::UU, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(vv[i] == doctest::Approx(std::exp(-grid[i])).epsilon(1e-10));
    CHECK(uu[i] == doctest::Approx((2.0 / 3.0) * std::exp(-grid[i])).epsilon(1e-10));
  }
}

TEST_CASE("mean-field closed form (n-1)^2/(2n) across sizes") {
  for (int n : {4, 8, 16, 50}) {
    MeetingSolution sol = meeting_moments(moran(n));
    double expected = (n - 1.0) * (n - 1.0) / (2.0 * n);
    CHECK(sol.t_meet == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("reduced and dense routes agree wherever both apply") {
  for (const Kernel& k : {moran(10), torus_nn(4, 2), hypercube(5), torus_nn(7, 1)}) {
    MeetingSolution full = meeting_moments_full(k);
    MeetingSolution red = meeting_moments_reduced(k);
    CHECK(red.reduced);
    CHECK(!full.reduced);
    CHECK(red.t_meet == doctest::Approx(full.t_meet).epsilon(1e-11));
    CHECK(red.mvv_mean == doctest::Approx(full.mvv_mean).epsilon(1e-11));
    CHECK(red.mvv_second == doctest::Approx(full.mvv_second).epsilon(1e-11));
    for (int x = 0; x < k.n; ++x)
      for (int y = 0; y < k.n; ++y) {
        CHECK(std::abs(red.mean_meeting(x, y) - full.mean_meeting(x, y)) <=
              1e-10 * std::max(1.0, full.mean_meeting(x, y)));
        CHECK(red.second_moment(x, y) >=
              red.mean_meeting(x, y) * red.mean_meeting(x, y) - 1e-10);
      }
  }
}

TEST_CASE("small tori: expected meeting times against independent solves") {
  // 3x3: the solve collapses to one unknown and gives exactly 4.
  CHECK(meeting_moments(torus_nn(3, 2)).t_meet == doctest::Approx(4.0).epsilon(1e-12));
  // 4x4: 103/12 from an independent sparse solve of the difference walk.
  CHECK(meeting_moments(torus_nn(4, 2)).t_meet ==
        doctest::Approx(103.0 / 12.0).epsilon(1e-12));
  // 4-cycle (equivalently the 2-cube).
  CHECK(meeting_moments(torus_nn(4, 1)).t_meet == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(meeting_moments(hypercube(2)).t_meet == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("bigger lattices and cubes: frozen reference values") {
  // Independent sparse linear solves of the difference-walk hitting system.
  CHECK(meeting_moments(torus_nn(20, 2)).t_meet ==
        doctest::Approx(420.3831166572086).epsilon(1e-10));
  CHECK(meeting_moments(torus_nn(6, 3)).t_meet ==
        doctest::Approx(139.5566017316052).epsilon(1e-10));
  CHECK(meeting_moments(hypercube(6)).t_meet ==
        doctest::Approx(37.92500000000019).epsilon(1e-10));
  CHECK(meeting_moments(hypercube(8)).t_meet ==
        doctest::Approx(150.6023809523797).epsilon(1e-10));
}

TEST_CASE("survival curve of a 20x20 lattice against frozen semigroup values") {
  Kernel k = torus_nn(20, 2);
  const double gamma = 420.3831166572086;
  std::vector<double> times = {0.25 * gamma, 0.5 * gamma, gamma, 2.0 * gamma};
  std::vector<double> uu = meeting_tail(k, PairKind::UU, times);
  std::vector<double> frozen = {0.7699364388657736, 0.6018230007624554,
                                0.3677150769268079, 0.1372766865538444};
  for (std::size_t i = 0; i < frozen.size(); ++i)
    CHECK(std::abs(uu[i] - frozen[i]) <= 1e-6);
}

TEST_CASE("the two survival curves satisfy the integral relation") {
  std::vector<double> grid;
  for (double t = 0.0; t <= 3.0 + 1e-12; t += 0.05) grid.push_back(t);
  for (const Kernel& k : {moran(6), hypercube(3), torus_nn(5, 1), torus_nn(4, 2)}) {
    TailRelationRecord rec = tail_relation_check(k, grid);
    CHECK(rec.max_residual <= 1e-8);
    CHECK(rec.residual.size() == grid.size());
    CHECK(tail_markov_bound_ok(k, grid));
  }
}

TEST_CASE("dual pair expectations at time zero reduce to configuration statistics") {
  Kernel k = torus_nn(3, 2);
  Rng rng(424242);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<std::uint8_t> xi(static_cast<std::size_t>(k.n));
    for (auto& v : xi) v = rng.u01() < 0.5 ? 1 : 0;

    double p1 = 0.0;
    for (int x = 0; x < k.n; ++x) p1 += k.pi[x] * xi[x];
    double pair10 = 0.0;
    for (int x = 0; x < k.n; ++x)
      for (std::size_t s = k.row_ptr[x]; s < k.row_ptr[x + 1]; ++s)
        pair10 += k.pi[x] * k.pi[x] * k.rate[s] * xi[x] * (1 - xi[k.col[s]]);
    pair10 /= k.nu_total;

    CHECK(dual_pair_expectation(k, xi, DualObservable::p1p0, 0.0) ==
          doctest::Approx(p1 * (1.0 - p1)).epsilon(1e-10));
    CHECK(dual_pair_expectation(k, xi, DualObservable::p10, 0.0) ==
          doctest::Approx(pair10).epsilon(1e-10));
  }

  // Consensus wipes every observable out at every time.
  std::vector<std::uint8_t> ones(static_cast<std::size_t>(k.n), 1);
  for (double t : {0.0, 0.7, 2.0}) {
    CHECK(std::abs(dual_pair_expectation(k, ones, DualObservable::p1p0, t)) <= 1e-12);
    CHECK(std::abs(dual_pair_expectation(k, ones, DualObservable::p10, t)) <= 1e-12);
  }
}

TEST_CASE("pair-correlation decoupling bounds hold on a small lattice") {
  Kernel k = torus_nn(3, 2);
  auto configs = default_bound_configs(k);
  CHECK(configs.size() == 512);  // exhaustive below 13 sites
  PairBoundRecord rec = pair_correlation_bound_check(k, 0.5, 1.5, configs);
  CHECK(rec.lhs.size() == configs.size());
  CHECK(rec.min_margin_basic >= -1e-9);
  CHECK(rec.min_margin_reversible >= -1e-9);
  CHECK(rec.tail_s >= rec.tail_t);
  CHECK(rec.d_e > 0.0);

  auto sampled = default_bound_configs(moran(20));
  CHECK(sampled.size() == 258);  // 256 draws plus the two consensus states
}

TEST_CASE("route guards refuse out-of-scope kernels with stable codes") {
  auto code_of = [](auto&& fn) -> std::string {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return "";
  };
  CHECK(code_of([] { meeting_moments_full(moran(65)); }) == "TooLarge");
  CHECK(code_of([] { meeting_moments_reduced(random_regular_perm(12, 4, 3)); }) ==
        "StrategyMismatch");
  CHECK(code_of([] { meeting_tail(moran(4), PairKind::UU, {1.0, 0.5}); }) == "BadParam");
}
