#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "voter/coalescent_sim.hpp"
#include "voter/errors.hpp"
#include "voter/graph_zoo.hpp"
#include "voter/stats.hpp"

using namespace vm;

TEST_CASE("a single lineage is already coalesced") {
  Kernel k = moran(5);
  Rng rng(3);
  CoalescentResult r = run_partial(k, 1, 1, rng);
  CHECK(r.started == 1);
  CHECK(r.time_to(1) == 0.0);
  CHECK(r.merges.empty());
}

TEST_CASE("two lineages on two sites merge at rate 2") {
  Kernel k = build_from_rates(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  Rng rng(1234);
  std::vector<double> times;
  for (int i = 0; i < 3000; ++i) times.push_back(run_full(k, 1, rng).time_to(1));
  MeanSe m = mean_se(times);
  CHECK(std::abs(m.mean - 0.5) <= 4.0 * m.se);
  // Exponential law, not merely the right mean.
  KsResult ks = ks_one_sample(times, [](double t) { return 1.0 - std::exp(-2.0 * t); });
  CHECK(ks.pass);
}

TEST_CASE("block counts fall monotonically through the recorded levels") {
  Kernel k = moran(8);
  Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    CoalescentResult r = run_full(k, 1, rng);
    CHECK(r.started == 8);
    double prev = 0.0;
    for (int level = 7; level >= 1; --level) {
      double t = r.time_to(level);
      CHECK(t >= prev - 1e-15);
      prev = t;
    }
    // Merge log: 7 merges to go from 8 blocks to 1.
    CHECK(r.merges.size() == 7);
  }
}

TEST_CASE("the final partition structure matches the stopping level") {
  Kernel k = moran(6);
  Rng rng(555);
  CoalescentResult r = run_full(k, 2, rng);
  REQUIRE(r.block_of.size() == 6);
  std::set<int> roots(r.block_of.begin(), r.block_of.end());
  CHECK(roots.size() == 2);
  for (int root : roots) CHECK(r.block_of[static_cast<std::size_t>(root)] == root);
}

TEST_CASE("independent starts can collide at time zero") {
  Kernel k = moran(2);
  int zeros = 0, positives = 0;
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    CoalescentResult r = run_partial(k, 2, 1, rng);
    (r.time_to(1) == 0.0 ? zeros : positives)++;
  }
  // Collision probability is 1/2 per draw; both outcomes must appear.
  CHECK(zeros > 50);
  CHECK(positives > 50);
}

TEST_CASE("block-counting reference sampler: means of the exponential ladder") {
  Rng rng(2468);
  std::vector<double> three;
  for (int i = 0; i < 4000; ++i) three.push_back(kingman_sampler(3, 1, rng));
  MeanSe m3 = mean_se(three);
  CHECK(std::abs(m3.mean - 4.0 / 3.0) <= 4.0 * m3.se);  // 1/3 + 1

  std::vector<double> entrance;
  for (int i = 0; i < 4000; ++i) entrance.push_back(kingman_sampler(kKingmanInfinite, 1, rng));
  MeanSe me = mean_se(entrance);
  // Truncated entrance law: mean 2 - 2/2000.
  CHECK(std::abs(me.mean - (2.0 - 1e-3)) <= 4.0 * me.se);

  std::vector<double> partial;
  for (int i = 0; i < 4000; ++i) partial.push_back(kingman_sampler(6, 3, rng));
  MeanSe mp = mean_se(partial);
  double expected = 0.0;
  for (int i = 6; i > 3; --i) expected += 2.0 / (i * (i - 1.0));
  CHECK(std::abs(mp.mean - expected) <= 4.0 * mp.se);
}

TEST_CASE("parameter guards carry stable codes") {
  Kernel k = moran(4);
  Rng rng(9);
  auto code_of = [&](auto&& fn) -> std::string {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return "";
  };
  CHECK(code_of([&] { run_partial(k, 0, 1, rng); }) == "BadParams");
  CHECK(code_of([&] { run_partial(k, 5, 1, rng); }) == "BadParams");  // more than n
  CHECK(code_of([&] { run_partial(k, 2, 3, rng); }) == "BadParams");
  CHECK(code_of([&] { run_full(k, 4, rng); }) == "BadParams");  // nothing to do
  CHECK(code_of([&] { kingman_sampler(2, 2, rng); }) == "BadParams");
  CHECK(code_of([&] { kingman_sampler(1, 1, rng); }) == "BadParams");
  CHECK(code_of([&] {
          Rng r2(1);
          CoalescentResult res = run_partial(k, 3, 2, r2);
          return res.time_to(1);  // below the recorded range
        }) == "BadParams");
}
