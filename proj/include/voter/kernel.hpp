#pragma once

// Finite irreducible rate matrices ("kernels"): CSR storage of the
// off-diagonal rates q(x,y), the stationary distribution pi, and the scalar
// summaries everything downstream keeps asking for:
//   pi_diag  = sum_x pi(x)^2
//   pi_max   = max_x pi(x)
//   q_max    = max_x q(x),  q(x) = sum_{y != x} q(x,y)
//   nu_total = sum_{x != y} pi(x)^2 q(x,y)
// plus the normalized pair measure nu(a,b) = pi(a)^2 q(a,b) / nu_total.
//
// A Kernel is immutable after construction and safe to share across workers.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "voter/rng.hpp"

namespace vm {

struct RateEntry {
  int from = 0;
  int to = 0;
  double rate = 0.0;
};

// Adjacency-count entry for multigraph construction; `count` is A(x,y).
struct AdjEntry {
  int x = 0;
  int y = 0;
  long long count = 0;
};

// Optional algebraic structure on the site set.  When `verified` is set the
// construction has checked, entry for entry, that q(x,y) = q(0, y - x) under
// the group law, so exact solvers may collapse the two-walker meeting
// problem onto the single difference walk.
struct GroupHint {
  enum class Type { none, cyclic, bits };
  Type type = Type::none;
  std::vector<int> dims;  // cyclic: row-major mixed-radix coordinates
  int nbits = 0;          // bits: site index read as an nbits-bit word
  bool verified = false;

  bool is_group() const { return type != Type::none; }
};

// Number of sites in the cyclic/bit group described by the hint.
std::size_t group_size(const GroupHint& hint);
// Index of b - a (componentwise mod dims, or xor for bit groups).
int group_difference(const GroupHint& hint, int a, int b);
// Index of -a under the group law.
int group_negate(const GroupHint& hint, int a);
// Index of a + b under the group law.
int group_add(const GroupHint& hint, int a, int b);

enum class PairKind { UU, VV };

class Kernel {
public:
  int n = 0;

  // Off-diagonal rates in CSR form, column-sorted within each row.
  std::vector<std::size_t> row_ptr;  // size n+1
  std::vector<int> col;
  std::vector<double> rate;

  // Reverse adjacency: for each y, the entries (x, q(x,y)).
  std::vector<std::size_t> in_ptr;
  std::vector<int> in_src;
  std::vector<double> in_rate;

  std::vector<double> total_rate;  // q(x)
  std::vector<double> pi;

  double pi_diag = 0.0;
  double pi_max = 0.0;
  double q_max = 0.0;
  double nu_total = 0.0;
  bool reversible = false;
  GroupHint group;

  std::size_t edge_count() const { return col.size(); }

  // q(x,y) by binary search in row x; 0 when the entry is absent.
  double q(int x, int y) const;

  // One site from pi.
  int sample_pi(Rng& rng) const;

  // Ordered pair: UU = two independent pi draws (may coincide);
  // VV = one draw from the normalized pair measure (never coincides).
  std::pair<int, int> sample_pair(PairKind which, Rng& rng) const;

  // Jump target from x, probability q(x,y)/q(x).  Linear scan over the row.
  int sample_target(int x, Rng& rng) const;

  bool has_pair_sampler() const { return !nu_alias.empty(); }

  // Samplers; built by the constructors (the pair sampler only while the
  // edge count stays under an internal cap, see kernel.cpp).
  AliasTable pi_alias;
  AliasTable nu_alias;  // over CSR edge slots
};

// The normalized pair measure as explicit (pair, weight) rows, CSR order.
struct PairMeasure {
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> weight;  // sums to 1
};

Kernel build_from_rates(int n, const std::vector<RateEntry>& entries,
                        GroupHint hint = {});

// Multigraph adjacency counts A(x,y) with the loop conventions
//   A(x,x) = 1 : half-loop, A(x,x) = 2 : whole loop;
// rates q(x,y) = A(x,y)/A(x) off the diagonal, q(x) = 1 - A(x,x)/A(x),
// pi(x) = A(x)/sum_z A(z).  Always reversible.
Kernel build_from_adjacency(int n, const std::vector<AdjEntry>& entries);

// Unique pi with pi q = 0, sum pi = 1: dense solve (one balance equation
// replaced by the normalization row) up to n <= 4096, power iteration on the
// uniformized transition matrix above that (residual 1e-12).
std::vector<double> stationary_distribution(int n, const std::vector<RateEntry>& entries);

PairMeasure pair_measure(const Kernel& k);

// Text format: comment lines (`#`), then `n`, then `x y rate` per entry with
// 17 significant digits (decimal round-trips are bit-exact).  A verified
// group hint is stored as a `# group ...` comment and re-verified on load.
void save_kernel(const Kernel& k, std::ostream& out);
void save_kernel(const Kernel& k, const std::string& path);
Kernel load_kernel(std::istream& in);
Kernel load_kernel(const std::string& path);

}  // namespace vm
