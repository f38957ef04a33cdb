#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "voter/errors.hpp"
#include "voter/stats.hpp"

using namespace vm;

TEST_CASE("empirical cdf: right-continuous steps at the sample points") {
  Ecdf f({3.0, 1.0, 2.0, 2.0});
  CHECK(f.size() == 4);
  CHECK(f(0.5) == 0.0);
  CHECK(f(1.0) == 0.25);
  CHECK(f(1.5) == 0.25);
  CHECK(f(2.0) == 0.75);  // both copies counted at the jump
  CHECK(f(2.9) == 0.75);
  CHECK(f(3.0) == 1.0);
  CHECK(f(99.0) == 1.0);
  CHECK(f.sorted().front() == 1.0);
  CHECK(f.sorted().back() == 3.0);
}

TEST_CASE("one-sample distance: hand-computed supremum") {
  auto unif = [](double t) { return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t); };

  // Decile midpoints: every jump straddles the diagonal by exactly 0.05.
  std::vector<double> mids;
  for (int i = 0; i < 10; ++i) mids.push_back(0.05 + 0.1 * i);
  KsResult ks = ks_one_sample(mids, unif);
  CHECK(ks.d == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(ks.threshold == doctest::Approx(1.628 / std::sqrt(10.0)).epsilon(1e-12));
  CHECK(ks.pass);

  // A sample wholly outside the support fails at any size.
  std::vector<double> far(50, 7.0);
  KsResult bad = ks_one_sample(far, unif);
  CHECK(bad.d == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(!bad.pass);

  // Small samples are refused rather than silently accepted.
  std::string code;
  try {
    ks_one_sample({0.5, 0.6}, unif);
  } catch (const Error& e) {
    code = e.code();
  }
  CHECK(code == "TooFewSamples");
}

TEST_CASE("two-sample distance: identical, disjoint, interleaved") {
  std::vector<double> a;
  for (int i = 1; i <= 12; ++i) a.push_back(i);
  KsResult same = ks_two_sample(a, a);
  CHECK(same.d == 0.0);
  CHECK(same.pass);

  std::vector<double> lo, hi;
  for (int i = 0; i < 10; ++i) {
    lo.push_back(1.0 + i);
    hi.push_back(100.0 + i);
  }
  KsResult apart = ks_two_sample(lo, hi);
  CHECK(apart.d == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(!apart.pass);

  // Odds vs evens 1..20: the ecdfs never drift more than one step apart.
  std::vector<double> odd, even;
  for (int i = 1; i <= 19; i += 2) {
    odd.push_back(i);
    even.push_back(i + 1);
  }
  KsResult inter = ks_two_sample(odd, even);
  CHECK(inter.d == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(inter.threshold ==
        doctest::Approx(1.628 * std::sqrt(20.0 / 100.0)).epsilon(1e-12));
  CHECK(inter.pass);
}

TEST_CASE("critical constants at the two supported levels") {
  CHECK(ks_critical(0.01) == doctest::Approx(1.628).epsilon(1e-12));
  CHECK(ks_critical(0.05) == doctest::Approx(1.358).epsilon(1e-12));
  std::string code;
  try {
    ks_critical(0.10);
  } catch (const Error& e) {
    code = e.code();
  }
  CHECK(code == "BadParam");
}

TEST_CASE("bootstrap interval: degenerate sample, determinism, coverage shape") {
  Rng rng(2718);
  std::vector<double> flat(40, 3.25);
  Interval iv = bootstrap_mean_ci(flat, 0.95, 400, rng);
  CHECK(iv.lo == doctest::Approx(3.25).epsilon(1e-15));
  CHECK(iv.hi == doctest::Approx(3.25).epsilon(1e-15));

  std::vector<double> sample;
  Rng gen(1);
  for (int i = 0; i < 200; ++i) sample.push_back(gen.u01());
  Rng r1(55), r2(55);
  Interval a = bootstrap_mean_ci(sample, 0.95, 500, r1);
  Interval b = bootstrap_mean_ci(sample, 0.95, 500, r2);
  CHECK(a.lo == b.lo);  // same stream, bit-identical
  CHECK(a.hi == b.hi);

  MeanSe m = mean_se(sample);
  CHECK(a.lo < m.mean);
  CHECK(m.mean < a.hi);
  // Width should be on the scale of a few SEs.
  CHECK(a.hi - a.lo > 1.0 * m.se);
  CHECK(a.hi - a.lo < 8.0 * m.se);
}

TEST_CASE("mean and standard error on a tiny hand case") {
  MeanSe m = mean_se({1.0, 2.0, 3.0, 4.0});
  CHECK(m.n == 4);
  CHECK(m.mean == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(m.sd == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-14));
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 12.0)).epsilon(1e-14));

  MeanSe single = mean_se({7.0});
  CHECK(single.mean == 7.0);
  CHECK(single.sd == 0.0);
}
