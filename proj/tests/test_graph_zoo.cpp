#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "voter/errors.hpp"
#include "voter/graph_zoo.hpp"

using namespace vm;

TEST_CASE("mean-field kernel: complete graph at unit site rate") {
  Kernel k = moran(5);
  CHECK(k.n == 5);
  for (int x = 0; x < 5; ++x) {
    CHECK(k.total_rate[x] == doctest::Approx(1.0).epsilon(1e-15));
    for (int y = 0; y < 5; ++y)
      if (x != y) CHECK(k.q(x, y) == doctest::Approx(0.25).epsilon(1e-15));
  }
  CHECK(k.reversible);
  CHECK(k.group.type == GroupHint::Type::cyclic);  // relabeling-invariant, cyclic works
  CHECK(k.group.verified);
  CHECK(k.nu_total == doctest::Approx(1.0 / 5.0).epsilon(1e-14));  // n(n-1) pi^2 q = 1/n
}

TEST_CASE("nearest-neighbour torus: unit-step offsets at rate 1/(2d)") {
  Kernel k = torus_nn(4, 2);
  CHECK(k.n == 16);
  // Row-major (r, c); site 0 talks to (0,1), (0,3), (1,0), (3,0).
  std::set<int> expected = {1, 3, 4, 12};
  std::set<int> got(k.col.begin() + static_cast<long>(k.row_ptr[0]),
                    k.col.begin() + static_cast<long>(k.row_ptr[1]));
  CHECK(got == expected);
  for (int y : expected) CHECK(k.q(0, y) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(k.total_rate[5] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(k.reversible);
  CHECK(k.group.verified);
  CHECK(k.group.dims == std::vector<int>{4, 4});

  Kernel k1 = torus_nn(6, 1);
  CHECK(k1.q(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(k1.q(0, 5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(k1.q(0, 2) == 0.0);
}

TEST_CASE("range-m ring with m = 1 coincides with the nearest-neighbour ring") {
  Kernel a = torus_range(9, 1, 1);
  Kernel b = torus_nn(9, 1);
  REQUIRE(a.n == b.n);
  REQUIRE(a.col == b.col);
  REQUIRE(a.row_ptr == b.row_ptr);
  for (std::size_t i = 0; i < a.rate.size(); ++i)
    CHECK(a.rate[i] == doctest::Approx(b.rate[i]).epsilon(1e-15));

  // m = 2: four offsets, each at rate 1/4.
  Kernel c = torus_range(7, 2, 1);
  std::set<int> expected = {1, 2, 5, 6};
  std::set<int> got(c.col.begin() + static_cast<long>(c.row_ptr[0]),
                    c.col.begin() + static_cast<long>(c.row_ptr[1]));
  CHECK(got == expected);
  for (int y : expected) CHECK(c.q(0, y) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("hypercube: bit-flip neighbours and a verified xor group") {
  Kernel k = hypercube(3);
  CHECK(k.n == 8);
  for (int x = 0; x < 8; ++x)
    for (int b = 0; b < 3; ++b)
      CHECK(k.q(x, x ^ (1 << b)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(k.q(0, 3) == 0.0);  // Hamming distance 2
  CHECK(k.group.type == GroupHint::Type::bits);
  CHECK(k.group.nbits == 3);
  CHECK(k.group.verified);
  CHECK(k.reversible);
}

TEST_CASE("random regular graph: exact degree, uniform pi, determinism") {
  int attempts = 0;
  Kernel k = random_regular_perm(24, 4, 7, &attempts);
  CHECK(attempts >= 1);
  CHECK(k.n == 24);
  CHECK(k.reversible);
  for (int x = 0; x < k.n; ++x) {
    CHECK(k.pi[x] == doctest::Approx(1.0 / 24.0).epsilon(1e-13));
    double row = 0.0;
    for (std::size_t s = k.row_ptr[x]; s < k.row_ptr[x + 1]; ++s) row += k.rate[s];
    // Rates A(x,y)/k with sum_y A(x,y) = k minus any loop mass; no loops kept
    // means the off-diagonal rates sum to 1 - A(x,x)/k.
    CHECK(row <= 1.0 + 1e-12);
    CHECK(row >= 0.25 - 1e-12);  // at least one distinct neighbour
  }

  Kernel again = random_regular_perm(24, 4, 7);
  CHECK(again.col == k.col);
  for (std::size_t i = 0; i < k.rate.size(); ++i) CHECK(again.rate[i] == k.rate[i]);

  Kernel other = random_regular_perm(24, 4, 8);
  CHECK((other.col != k.col || other.rate != k.rate));  // different seed, different graph
}

TEST_CASE("zoo spec round-trip: labels and parameter validation") {
  ZooSpec spec;
  spec.family = "torus_nn";
  spec.params = {{"n", 5}, {"d", 2}};
  Kernel k = make_zoo_kernel(spec);
  CHECK(k.n == 25);
  CHECK(zoo_label(spec) == "torus_nn_d2_n5");  // params in key order

  ZooSpec mf;
  mf.family = "moran";
  mf.params = {{"n", 7}};
  CHECK(make_zoo_kernel(mf).n == 7);
  CHECK(zoo_label(mf) == "moran_n7");

  auto code_of = [](auto&& fn) -> std::string {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return "";
  };
  CHECK(code_of([] {
          ZooSpec s;
          s.family = "no_such_family";
          return make_zoo_kernel(s);
        }) != "");
  CHECK(code_of([] { torus_range(8, 4, 1); }) == "BadParam");  // needs 2m < n
  CHECK(code_of([] { random_regular_perm(10, 3, 1); }) == "BadParam");  // odd degree
  CHECK(code_of([] { torus_nn(2, 2); }) == "BadParam");
}
