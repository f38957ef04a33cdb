#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "voter/analysis.hpp"
#include "voter/errors.hpp"
#include "voter/graph_zoo.hpp"
#include "voter/kernel.hpp"

using namespace vm;

TEST_CASE("two-state chain: gap, worst-case distance, mixing time in closed form") {
  Kernel k = build_from_rates(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  CHECK(spectral_gap(k) == doctest::Approx(2.0).epsilon(1e-13));
  // d_E(t) = (1/2) e^{-2t}; solving d_E = 1/(2e) gives t = 1/2.
  for (double t : {0.1, 0.5, 1.0, 2.0})
    CHECK(tv_distance(k, t) == doctest::Approx(0.5 * std::exp(-2.0 * t)).epsilon(1e-12));
  CHECK(mixing_time(k) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("mean-field chain: gap n/(n-1) and the explicit distance curve") {
  for (int n : {3, 5, 10}) {
    Kernel k = moran(n);
    double lam = static_cast<double>(n) / (n - 1);
    CHECK(spectral_gap(k) == doctest::Approx(lam).epsilon(1e-12));
    // P_t(x, x) = 1/n + (1 - 1/n) e^{-lam t}: total-variation distance from
    // pi is (1 - 1/n) e^{-lam t} for every start.
    for (double t : {0.3, 1.0})
      CHECK(tv_distance(k, t) ==
            doctest::Approx((1.0 - 1.0 / n) * std::exp(-lam * t)).epsilon(1e-12));
    double t_mix = (1.0 / lam) * std::log(2.0 * std::exp(1.0) * (1.0 - 1.0 / n));
    CHECK(mixing_time(k) == doctest::Approx(t_mix).epsilon(1e-6));
  }
}

TEST_CASE("ring and hypercube gaps against the spectral formulas") {
  // Ring at rate 1/2 per side: gap = 1 - cos(2 pi / n).
  Kernel ring = torus_nn(10, 1);
  CHECK(spectral_gap(ring) ==
        doctest::Approx(1.0 - std::cos(2.0 * M_PI / 10.0)).epsilon(1e-12));

  // Bit-flip walk at rate 1/d per coordinate: gap = 2/d.
  for (int d : {2, 4, 7})
    CHECK(spectral_gap(hypercube(d)) == doctest::Approx(2.0 / d).epsilon(1e-12));
}

TEST_CASE("sparse eigensolver agrees with the dense route") {
  for (const Kernel& k : {hypercube(8), torus_nn(30, 1), torus_nn(7, 2)}) {
    double dense = spectral_gap(k);
    double sparse = spectral_gap_lanczos(k);
    CHECK(std::abs(dense - sparse) <= 1e-8 * std::max(1.0, dense));
  }
}

TEST_CASE("distance curve is monotone and the mixing time brackets the threshold") {
  Kernel k = torus_nn(4, 2);
  double prev = 1.0;
  for (double t = 0.0; t <= 6.0; t += 0.25) {
    double d = tv_distance(k, t);
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
  double tm = mixing_time(k);
  CHECK(tv_distance(k, tm) <= kMixingThreshold * (1.0 + 1e-6) + 1e-12);
  CHECK(tv_distance(k, 0.95 * tm) > kMixingThreshold);
}

TEST_CASE("bottleneck ratio of a marked set, by hand on the 10-ring") {
  Kernel k = torus_nn(10, 1);
  // Contiguous block of five: two boundary edges, each carrying pi q = 1/20.
  std::vector<int> block = {0, 1, 2, 3, 4};
  CHECK(bottleneck_ratio(k, block) == doctest::Approx(0.2).epsilon(1e-13));
  // A single site: flow 1/10, mass 1/10.
  CHECK(bottleneck_ratio(k, {3}) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("interval scan equals exhaustive search on 1-d kernels") {
  for (auto [n, m] : {std::pair{10, 2}, std::pair{12, 2}, std::pair{16, 3}}) {
    Kernel k = torus_range(n, m, 1);
    BottleneckResult ex = bottleneck_optimum(k, BottleneckStrategy::exhaustive);
    BottleneckResult iv = bottleneck_optimum(k, BottleneckStrategy::intervals_1d);
    CHECK(ex.phi == doctest::Approx(iv.phi).epsilon(1e-12));
    // Half-ring optimum: (m + 1)/(2 floor(n/2)).
    double predicted = (m + 1.0) / (2.0 * std::floor(n / 2.0));
    CHECK(iv.phi == doctest::Approx(predicted).epsilon(1e-12));
    CHECK(!iv.witness.empty());
    CHECK(bottleneck_ratio(k, iv.witness) == doctest::Approx(iv.phi).epsilon(1e-12));
  }
}

TEST_CASE("exhaustive bottleneck on the 4-cube and the mean-field graph") {
  BottleneckResult cube = bottleneck_optimum(hypercube(4), BottleneckStrategy::exhaustive);
  CHECK(cube.phi == doctest::Approx(0.25).epsilon(1e-12));  // split along one coordinate

  // Complete graph: any |S| = j has Phi = (n - j)/(n - 1); the half split wins.
  BottleneckResult mf = bottleneck_optimum(moran(9), BottleneckStrategy::exhaustive);
  CHECK(mf.phi == doctest::Approx(5.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("gap vs bottleneck: the quadratic lower bound holds with room") {
  for (const Kernel& k : {moran(8), hypercube(4), torus_nn(12, 1), torus_range(10, 2, 1)}) {
    CheegerResult c = cheeger_check(k);
    CHECK(c.bound_ok);
    CHECK(c.gap >= c.phi_star * c.phi_star / 2.0 - 1e-9);
  }
  CheegerResult mf = cheeger_check(moran(8));
  CHECK(mf.phi_star == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(mf.gap == doctest::Approx(8.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("condition report: scalar wiring on a kernel with known numbers") {
  Kernel k = moran(10);
  double t_meet = 81.0 / 20.0;  // (n-1)^2 / (2n)
  ConditionReport r = condition_report(k, t_meet);
  CHECK(r.reversible);
  CHECK(r.pi_diag == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(r.gap == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
  CHECK(r.t_meet == doctest::Approx(t_meet).epsilon(1e-13));
  CHECK(r.gap_tmeet == doctest::Approx(4.5).epsilon(1e-10));
  double t_mix = 0.9 * std::log(2.0 * std::exp(1.0) * 0.9);
  CHECK(r.t_mix == doctest::Approx(t_mix).epsilon(1e-6));
  CHECK(r.ratio_mix == doctest::Approx(t_mix / t_meet).epsilon(1e-6));
  CHECK(std::isfinite(r.logterm));
}

TEST_CASE("non-reversible kernels are refused by the spectral routines") {
  Kernel cyc = build_from_rates(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}});
  CHECK(!cyc.reversible);
  std::string code;
  try {
    spectral_gap(cyc);
  } catch (const Error& e) {
    code = e.code();
  }
  CHECK(code == "NotReversible");
}
