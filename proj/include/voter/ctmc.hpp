#pragma once

// Semigroup evaluation for finite-state continuous-time chains via
// uniformization: e^{tQ} acting on a distribution is the Poisson(L*t)
// mixture of powers of P = I + Q/L with L >= max total rate.  The series is
// truncated when the remaining Poisson tail drops below eps (one-sided
// control: the result under-counts by at most eps in l1).
//
// Rows with zero out-rate are absorbing (P row = identity), which is how the
// meeting solver freezes coalesced pair states.

#include <cstddef>
#include <functional>
#include <vector>

#include "voter/kernel.hpp"

namespace vm {

struct SparseGen {
  int n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<int> col;
  std::vector<double> rate;
  std::vector<double> out_rate;
  double max_rate = 0.0;  // uniformization constant L

  void finish();  // fill out_rate/max_rate from the CSR arrays
};

// The kernel's own generator (no absorption).
SparseGen generator_of(const Kernel& k);

constexpr double kTruncationTol = 1e-12;

// In-place dist <- dist * e^{tQ}.
void evolve_distribution(const SparseGen& g, std::vector<double>& dist, double t,
                         double eps = kTruncationTol);

// Sequential evolution through an ascending grid of times (absolute, from 0);
// visit(i, dist) sees the distribution at times[i].
void evolve_on_grid(const SparseGen& g, std::vector<double> dist,
                    const std::vector<double>& times,
                    const std::function<void(std::size_t, const std::vector<double>&)>& visit,
                    double eps = kTruncationTol);

}  // namespace vm
