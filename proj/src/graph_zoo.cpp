#include "voter/graph_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace vm {

namespace {

constexpr std::size_t kStateCap = std::size_t{1} << 20;
constexpr std::size_t kEdgeCap = std::size_t{1} << 23;

std::size_t checked_power(int n, int d) {
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    total *= static_cast<std::size_t>(n);
    require(total <= kStateCap, "TooLarge",
            "site count n^d exceeds the generation cap 2^20");
  }
  return total;
}

}  // namespace

Kernel moran(int n) {
  require(n >= 2, "BadParam", "mean-field kernel needs n >= 2");
  std::size_t edges = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1);
  require(edges <= kEdgeCap, "TooLarge", "complete graph exceeds the edge cap 2^23");
  double r = 1.0 / static_cast<double>(n - 1);
  std::vector<RateEntry> entries;
  entries.reserve(edges);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (y != x) entries.push_back({x, y, r});
  GroupHint hint;
  hint.type = GroupHint::Type::cyclic;
  hint.dims = {n};
  return build_from_rates(n, entries, hint);
}

namespace {

// Shared torus builder: uniform rate over the given nonzero offsets,
// coordinates mod n, row-major encoding.
Kernel torus_from_offsets(int n, int d, const std::vector<std::vector<int>>& offsets) {
  std::size_t total = checked_power(n, d);
  require(total * offsets.size() <= kEdgeCap, "TooLarge",
          "torus edge count exceeds the cap 2^23");
  double r = 1.0 / static_cast<double>(offsets.size());

  std::vector<RateEntry> entries;
  entries.reserve(total * offsets.size());
  std::vector<int> coord(static_cast<std::size_t>(d), 0);
  for (std::size_t x = 0; x < total; ++x) {
    for (const auto& o : offsets) {
      std::size_t y = 0;
      for (int i = 0; i < d; ++i) {
        int c = coord[i] + o[i];
        if (c < 0) c += n;
        if (c >= n) c -= n;
        y = y * static_cast<std::size_t>(n) + static_cast<std::size_t>(c);
      }
      entries.push_back({static_cast<int>(x), static_cast<int>(y), r});
    }
    int i = d - 1;
    while (i >= 0 && coord[i] == n - 1) coord[i--] = 0;
    if (i >= 0) ++coord[i];
  }

  GroupHint hint;
  hint.type = GroupHint::Type::cyclic;
  hint.dims.assign(static_cast<std::size_t>(d), n);
  return build_from_rates(static_cast<int>(total), entries, hint);
}

}  // namespace

Kernel torus_nn(int n, int d) {
  require(n >= 3 && d >= 1, "BadParam", "torus needs n >= 3 and d >= 1");
  // The 2d unit steps +-e_i (NOT the range-1 box: that has 3^d - 1 offsets
  // and a different diffusion constant for d >= 2).
  std::vector<std::vector<int>> offsets;
  offsets.reserve(2 * static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    std::vector<int> o(static_cast<std::size_t>(d), 0);
    o[i] = 1;
    offsets.push_back(o);
    o[i] = -1;
    offsets.push_back(o);
  }
  return torus_from_offsets(n, d, offsets);
}

Kernel torus_range(int n, int m, int d) {
  require(n >= 3 && d >= 1, "BadParam", "torus needs n >= 3 and d >= 1");
  require(m >= 1 && 2 * m < n, "BadParam",
          "offset range must satisfy 1 <= m < n/2 (offsets must not wrap)");
  // Enumerate the offset box [-m, m]^d minus the origin.
  std::vector<std::vector<int>> offsets;
  std::vector<int> off(static_cast<std::size_t>(d), -m);
  for (;;) {
    bool zero = std::all_of(off.begin(), off.end(), [](int c) { return c == 0; });
    if (!zero) offsets.push_back(off);
    int i = d - 1;
    while (i >= 0 && off[i] == m) off[i--] = -m;
    if (i < 0) break;
    ++off[i];
  }
  return torus_from_offsets(n, d, offsets);
}

Kernel hypercube(int n_dim) {
  require(n_dim >= 1, "BadParam", "hypercube needs n_dim >= 1");
  require(n_dim <= 20, "TooLarge", "hypercube capped at 2^20 sites");
  std::size_t total = std::size_t{1} << n_dim;
  double r = 1.0 / static_cast<double>(n_dim);
  std::vector<RateEntry> entries;
  entries.reserve(total * static_cast<std::size_t>(n_dim));
  for (std::size_t x = 0; x < total; ++x)
    for (int b = 0; b < n_dim; ++b)
      entries.push_back({static_cast<int>(x), static_cast<int>(x ^ (std::size_t{1} << b)), r});
  GroupHint hint;
  hint.type = GroupHint::Type::bits;
  hint.nbits = n_dim;
  return build_from_rates(static_cast<int>(total), entries, hint);
}

Kernel random_regular_perm(int n, int k, std::uint64_t seed, int* attempts_out) {
  require(k >= 4 && k % 2 == 0, "BadParam", "degree k must be even and >= 4");
  require(n > k, "BadParam", "need n > k sites");
  require(static_cast<std::size_t>(n) * static_cast<std::size_t>(k) <= kEdgeCap, "TooLarge",
          "n*k exceeds the edge cap 2^23");

  for (int attempt = 0; attempt < 32; ++attempt) {
    Rng rng(seed + static_cast<std::uint64_t>(attempt));
    // Adjacency counts A(x,y) accumulated over k/2 Fisher-Yates permutations.
    std::map<std::pair<int, int>, long long> counts;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int j = 0; j < k / 2; ++j) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = n - 1; i > 0; --i) {
        int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[i], perm[pick]);
      }
      for (int x = 0; x < n; ++x) {
        counts[{x, perm[x]}] += 1;   // edge to rho_j(x)
        counts[{perm[x], x}] += 1;   // edge to rho_j^{-1}(rho_j(x)) = x
      }
    }
    std::vector<AdjEntry> entries;
    entries.reserve(counts.size());
    for (const auto& [xy, c] : counts) entries.push_back({xy.first, xy.second, c});
    try {
      Kernel kern = build_from_adjacency(n, entries);
      if (attempts_out) *attempts_out = attempt + 1;
      return kern;
    } catch (const Error& err) {
      if (err.code() != "Disconnected") throw;
    }
  }
  fail("PersistentlyDisconnected",
       "random regular graph stayed disconnected for 32 seeds starting at " +
           std::to_string(seed));
}

Kernel make_zoo_kernel(const ZooSpec& spec, int* attempts_out) {
  auto param = [&](const char* name, long long fallback, bool required_param) {
    auto it = spec.params.find(name);
    if (it == spec.params.end()) {
      require(!required_param, "BadParam",
              "family '" + spec.family + "' needs parameter '" + name + "'");
      return fallback;
    }
    return it->second;
  };
  if (spec.family == "moran") return moran(static_cast<int>(param("n", 0, true)));
  if (spec.family == "torus_nn")
    return torus_nn(static_cast<int>(param("n", 0, true)), static_cast<int>(param("d", 1, false)));
  if (spec.family == "torus_range")
    return torus_range(static_cast<int>(param("n", 0, true)), static_cast<int>(param("m", 0, true)),
                       static_cast<int>(param("d", 1, false)));
  if (spec.family == "hypercube") return hypercube(static_cast<int>(param("n", 0, true)));
  if (spec.family == "random_regular_perm")
    return random_regular_perm(static_cast<int>(param("n", 0, true)),
                               static_cast<int>(param("k", 0, true)),
                               static_cast<std::uint64_t>(param("seed", 1, false)), attempts_out);
  fail("BadParam", "unknown kernel family '" + spec.family + "'");
}

std::string zoo_label(const ZooSpec& spec) {
  std::ostringstream out;
  out << spec.family;
  for (const auto& [key, value] : spec.params) out << '_' << key << value;
  return out.str();
}

}  // namespace vm
