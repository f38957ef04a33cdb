#pragma once

// Kernel generators for the model families the test-suites run on:
// mean-field (complete graph), nearest-neighbour and finite-range tori,
// hypercubes, and permutation-model random regular multigraphs.
//
// Coordinate conventions (tests address specific sites through these):
//   - tori: site index is row-major mixed-radix over d coordinates in
//     {0..n-1}, innermost coordinate last;
//   - hypercube: site index read as an n_dim-bit word, neighbours differ in
//     exactly one bit.
// All generators are pure functions of their parameters (and seed), emitting
// bit-identical kernels on every call.

#include <cstdint>
#include <map>
#include <string>

#include "voter/kernel.hpp"

namespace vm {

// Uniform adoption from everybody else: q(x,y) = 1/(n-1).
Kernel moran(int n);

// d-dimensional discrete torus with n^d sites, rate 1/(2d) to each of the
// 2d unit-step neighbours (n >= 3 so +1 and -1 steps stay distinct).
Kernel torus_nn(int n, int d);

// Finite-range torus: uniform rate over the (2m+1)^d - 1 offsets with all
// coordinates in [-m, m], excluding 0; requires m < n/2 so offsets do not
// wrap onto each other.
Kernel torus_range(int n, int m, int d);

// n_dim-dimensional hypercube on 2^n_dim sites, rate 1/n_dim per bit flip.
Kernel hypercube(int n_dim);

// k-regular random multigraph from k/2 i.i.d. uniform permutations rho_j,
// with edges (x, rho_j(x)) and (x, rho_j^{-1}(x)); a fixed point of rho_j
// contributes a whole loop, i.e. 2 to A(x,x), so row sums are exactly k.
// Disconnected draws are resampled with an incremented seed (up to 32
// tries); the number of attempts used is written to *attempts_out when
// given.
Kernel random_regular_perm(int n, int k, std::uint64_t seed, int* attempts_out = nullptr);

// Family name + parameter map, as parsed from configs / the CLI.
struct ZooSpec {
  std::string family;
  std::map<std::string, long long> params;  // n, d, m, k, seed as applicable
};

Kernel make_zoo_kernel(const ZooSpec& spec, int* attempts_out = nullptr);
std::string zoo_label(const ZooSpec& spec);

}  // namespace vm
