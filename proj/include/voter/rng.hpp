#pragma once

// Randomness utilities: seed derivation for per-replica streams, a thin
// wrapper over mt19937_64 with the handful of variate generators the
// simulators need, Walker/Vose alias tables for O(1) categorical sampling,
// and a Fenwick tree with prefix sampling for dynamically weighted picks.
//
// Distributions are hand-rolled (inverse CDF, Box-Muller) rather than taken
// from <random> so that streams are bit-stable across standard libraries.

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "voter/errors.hpp"

namespace vm {

// splitmix64 step; used only to derive seeds, never as the main generator.
inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic stream for (master_seed, index): replica i sees the same
// stream no matter which worker runs it or in what order.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);  // mix master once so master=0 is fine
  s = h ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
  return splitmix64(s);
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  static Rng for_replica(std::uint64_t master, std::uint64_t index) {
    return Rng(derive_stream_seed(master, index));
  }

  std::uint64_t bits() { return eng_(); }

  // Uniform in [0,1) with 53 random bits.
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in (0,1]; safe as a log argument.
  double u01_pos() { return 1.0 - u01(); }

  double exponential(double rate) {
    require(rate > 0.0, "BadParam", "exponential rate must be positive");
    return -std::log(u01_pos()) / rate;
  }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    constexpr double two_pi = 6.2831853071795864769;
    double r = std::sqrt(-2.0 * std::log(u01_pos()));
    double a = two_pi * u01();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n), masked rejection (no modulo bias).
  std::uint64_t below(std::uint64_t n) {
    require(n > 0, "BadParam", "below(0) is empty");
    if (n == 1) return 0;
    int width = 64 - std::countl_zero(n - 1);
    std::uint64_t mask = (width >= 64) ? ~0ULL : ((1ULL << width) - 1);
    for (;;) {
      std::uint64_t v = eng_() & mask;
      if (v < n) return v;
    }
  }

  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Walker/Vose alias table: O(n) build, O(1) sample from fixed weights.
class AliasTable {
public:
  AliasTable() = default;

  explicit AliasTable(const std::vector<double>& w) { build(w); }

  void build(const std::vector<double>& w) {
    n_ = w.size();
    require(n_ > 0, "BadParam", "alias table needs at least one weight");
    double total = 0.0;
    for (double x : w) {
      require(x >= 0.0 && std::isfinite(x), "BadParam", "alias weights must be finite and >= 0");
      total += x;
    }
    require(total > 0.0, "BadParam", "alias weights sum to zero");
    total_ = total;
    prob_.assign(n_, 0.0);
    alias_.assign(n_, 0);
    std::vector<double> scaled(n_);
    std::vector<std::uint32_t> small, large;
    small.reserve(n_);
    large.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      scaled[i] = w[i] * static_cast<double>(n_) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      std::uint32_t s = small.back();
      std::uint32_t l = large.back();
      small.pop_back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    // Leftovers are 1 up to rounding.
    for (std::uint32_t i : large) prob_[i] = 1.0;
    for (std::uint32_t i : small) prob_[i] = 1.0;
  }

  std::size_t sample(Rng& rng) const {
    std::size_t i = static_cast<std::size_t>(rng.below(n_));
    return rng.u01() < prob_[i] ? i : alias_[i];
  }

  std::size_t size() const { return n_; }
  double total_weight() const { return total_; }
  bool empty() const { return n_ == 0; }

private:
  std::size_t n_ = 0;
  double total_ = 0.0;
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

// Fenwick tree over nonnegative weights with prefix sampling.  Used where
// weights change as the simulation runs (discordant rates, live lineages).
class Fenwick {
public:
  Fenwick() = default;
  explicit Fenwick(std::size_t n) { assign(n); }

  void assign(std::size_t n) {
    n_ = n;
    tree_.assign(n + 1, 0.0);
    leaf_.assign(n, 0.0);
    total_ = 0.0;
  }

  std::size_t size() const { return n_; }
  double value(std::size_t i) const { return leaf_[i]; }
  double total() const { return total_; }

  void add(std::size_t i, double delta) {
    if (delta == 0.0) return;
    leaf_[i] += delta;
    total_ += delta;
    for (std::size_t j = i + 1; j <= n_; j += j & (~j + 1)) tree_[j] += delta;
  }

  void set(std::size_t i, double v) { add(i, v - leaf_[i]); }

  // Sum of leaves [0, i).
  double prefix(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = i; j > 0; j -= j & (~j + 1)) s += tree_[j];
    return s;
  }

  // Index i with prefix(i) <= target < prefix(i+1) for target in [0, total).
  // Floating drift can push the descent past the last positive leaf; we clamp
  // back onto one.  Callers should pass target = u * total().
  std::size_t sample(double target) const {
    std::size_t pos = 0;
    std::size_t bit = std::bit_floor(n_ | 1);
    double rem = target;
    for (; bit > 0; bit >>= 1) {
      std::size_t next = pos + bit;
      if (next <= n_ && tree_[next] <= rem) {
        rem -= tree_[next];
        pos = next;
      }
    }
    if (pos >= n_) pos = n_ - 1;
    while (pos > 0 && leaf_[pos] <= 0.0) --pos;
    return pos;
  }

  // Recompute internal sums from the leaves, shedding accumulated
  // floating-point drift from long add/subtract sequences.
  void rebuild() {
    std::fill(tree_.begin(), tree_.end(), 0.0);
    total_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      total_ += leaf_[i];
      for (std::size_t j = i + 1; j <= n_; j += j & (~j + 1)) tree_[j] += leaf_[i];
    }
  }

private:
  std::size_t n_ = 0;
  double total_ = 0.0;
  std::vector<double> tree_;  // 1-based
  std::vector<double> leaf_;
};

}  // namespace vm
