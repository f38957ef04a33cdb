#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "voter/errors.hpp"
#include "voter/stats.hpp"
#include "voter/wf_reference.hpp"

using namespace vm;

TEST_CASE("death-chain law at small k against closed forms") {
  // From 3 blocks: holds Exp(3) then Exp(1).
  //   P(D_t = 3) = e^{-3t}
  //   P(D_t = 2) = (3/2)(e^{-t} - e^{-3t})
  std::vector<double> p = death_chain_dist(3, 1.0);
  REQUIRE(p.size() == 3);
  CHECK(p[2] == doctest::Approx(std::exp(-3.0)).epsilon(1e-13));
  CHECK(p[1] == doctest::Approx(1.5 * (std::exp(-1.0) - std::exp(-3.0))).epsilon(1e-13));
  CHECK(p[0] == doctest::Approx(0.4730743724267699).epsilon(1e-13));
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-13));

  // t = 0 is a point mass at k; the chain never leaves state 1.
  std::vector<double> start = death_chain_dist(5, 0.0);
  CHECK(start[4] == 1.0);
  std::vector<double> one = death_chain_dist(1, 3.0);
  CHECK(one[0] == 1.0);
}

TEST_CASE("moment duality: eigen route equals uniformization route") {
  for (int k : {1, 2, 3, 7, 20, 60}) {
    for (double t : {0.05, 0.5, 2.0}) {
      for (double u : {0.2, 0.5, 0.9}) {
        std::vector<double> law = death_chain_dist(k, t);
        double via_chain = 0.0;
        for (int j = 1; j <= k; ++j) via_chain += std::pow(u, j) * law[j - 1];
        CHECK(wf_moment(u, k, t) == doctest::Approx(via_chain).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("diffusion moments: martingale, heterozygosity decay, limits") {
  // First moment is conserved.
  for (double t : {0.0, 0.3, 5.0}) CHECK(wf_moment(0.7, 1, t) == doctest::Approx(0.7).epsilon(1e-13));

  // E[Y(1-Y)] = u(1-u) e^{-t}; at u = 1/2, t = 1 this is e^{-1}/4.
  double het = wf_moment(0.5, 1, 1.0) - wf_moment(0.5, 2, 1.0);
  CHECK(het == doctest::Approx(0.09196986029286058).epsilon(1e-13));
  CHECK(wf_moment(0.5, 2, 1.0) == doctest::Approx(0.5 - 0.25 * std::exp(-1.0)).epsilon(1e-13));

  // Long-time limit: fixation at 1 with probability u.
  CHECK(wf_moment(0.3, 5, 40.0) == doctest::Approx(0.3).epsilon(1e-9));

  // Degenerate starts stay put.
  CHECK(wf_moment(0.0, 4, 1.0) == 0.0);
  CHECK(wf_moment(1.0, 4, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("atom-plus-exponential reference distribution") {
  CHECK(mixture_cdf(0.2, 0.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(mixture_cdf(0.2, 1.0) == doctest::Approx(0.7056964470628462).epsilon(1e-14));
  CHECK(mixture_cdf(0.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(mixture_cdf(0.2, 50.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("death-chain sampler follows the computed law") {
  Rng rng(13579);
  const int k = 4;
  const double t = 0.6;
  std::vector<double> law = death_chain_dist(k, t);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  const int draws = 6000;
  for (int i = 0; i < draws; ++i) {
    int d = death_chain_sample(k, t, rng);
    REQUIRE(d >= 1);
    REQUIRE(d <= k);
    counts[static_cast<std::size_t>(d - 1)]++;
  }
  for (int j = 1; j <= k; ++j) {
    double freq = static_cast<double>(counts[j - 1]) / draws;
    double se = std::sqrt(law[j - 1] * (1.0 - law[j - 1]) / draws);
    CHECK(std::abs(freq - law[j - 1]) <= 4.0 * se + 1e-9);
  }
}

TEST_CASE("path simulator: martingale mean and clamped range") {
  Rng rng(8642);
  std::vector<double> finals;
  int absorbed = 0;
  for (int i = 0; i < 600; ++i) {
    WfTrajectory traj = wf_simulate(0.3, 1.0, 1e-3, rng);
    CHECK(traj.final_value >= 0.0);
    CHECK(traj.final_value <= 1.0);
    for (double v : traj.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    if (traj.absorbed) ++absorbed;
    finals.push_back(traj.final_value);
  }
  MeanSe m = mean_se(finals);
  // Euler discretization bias is O(dt) here; 4 SE plus a small cushion.
  CHECK(std::abs(m.mean - 0.3) <= 4.0 * m.se + 0.005);
  CHECK(absorbed >= 1);  // plenty of paths hit a boundary by t = 1

  std::string code;
  try {
    wf_simulate(0.5, 1.0, 0.5, rng);  // dt too coarse for the horizon
  } catch (const Error& e) {
    code = e.code();
  }
  CHECK(code == "BadParam");
}

TEST_CASE("moment guards: degree cap and argument checks") {
  auto code_of = [](auto&& fn) -> std::string {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return "";
  };
  CHECK(code_of([] { wf_moment(0.5, 101, 1.0); }) == "Overflow");
  CHECK(code_of([] { wf_moment(-0.1, 2, 1.0); }) == "BadParam");
  CHECK(code_of([] { wf_moment(0.5, 0, 1.0); }) == "BadParam");
  CHECK(code_of([] { death_chain_dist(0, 1.0); }) == "BadParam");
  CHECK(code_of([] { mixture_cdf(1.5, 1.0); }) == "BadParam");
}
