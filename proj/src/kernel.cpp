#include "voter/kernel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace vm {

namespace {

constexpr double kBalanceTol = 1e-10;
constexpr double kDetailedBalanceTol = 1e-10;
constexpr int kDenseSolveCap = 4096;
// Pair-measure alias tables are skipped above this edge count; only the very
// largest generated kernels (e.g. 2^20-site hypercubes) hit the cap, and
// those are out of range for every sampler that would want the table anyway.
constexpr std::size_t kPairSamplerEdgeCap = std::size_t{1} << 23;

void check_entries(int n, const std::vector<RateEntry>& entries) {
  require(n >= 2, "BadIndex", "kernel needs at least two sites");
  for (const auto& e : entries) {
    require(e.from >= 0 && e.from < n && e.to >= 0 && e.to < n, "BadIndex",
            "rate entry (" + std::to_string(e.from) + "," + std::to_string(e.to) +
                ") out of range for n=" + std::to_string(n));
    require(e.from != e.to, "BadIndex",
            "diagonal rate entries are implied and may not be given (site " +
                std::to_string(e.from) + ")");
    require(std::isfinite(e.rate) && e.rate >= 0.0, "NegativeRate",
            "rate q(" + std::to_string(e.from) + "," + std::to_string(e.to) +
                ") = " + std::to_string(e.rate) + " must be finite and >= 0");
  }
}

// Sorted, deduplicated (summed) CSR of the positive off-diagonal entries.
struct Csr {
  int n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<int> col;
  std::vector<double> val;
};

Csr to_csr(int n, const std::vector<RateEntry>& entries) {
  std::vector<std::tuple<int, int, double>> items;
  items.reserve(entries.size());
  for (const auto& e : entries)
    if (e.rate > 0.0) items.emplace_back(e.from, e.to, e.rate);
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) {
              return std::tie(std::get<0>(a), std::get<1>(a)) <
                     std::tie(std::get<0>(b), std::get<1>(b));
            });
  Csr csr;
  csr.n = n;
  csr.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  csr.col.reserve(items.size());
  csr.val.reserve(items.size());
  for (std::size_t i = 0; i < items.size();) {
    auto [x, y, r] = items[i];
    double sum = r;
    std::size_t j = i + 1;
    while (j < items.size() && std::get<0>(items[j]) == x && std::get<1>(items[j]) == y)
      sum += std::get<2>(items[j++]);
    csr.col.push_back(y);
    csr.val.push_back(sum);
    csr.row_ptr[static_cast<std::size_t>(x) + 1]++;
    i = j;
  }
  for (int x = 0; x < n; ++x) csr.row_ptr[x + 1] += csr.row_ptr[x];
  return csr;
}

bool reaches_all(int n, const std::vector<std::size_t>& ptr, const std::vector<int>& adj) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    for (std::size_t e = ptr[x]; e < ptr[x + 1]; ++e) {
      int y = adj[e];
      if (!seen[y]) {
        seen[y] = 1;
        ++count;
        stack.push_back(y);
      }
    }
  }
  return count == n;
}

std::vector<double> stationary_from_csr(const Csr& csr) {
  int n = csr.n;
  std::vector<double> out_rate(static_cast<std::size_t>(n), 0.0);
  for (int x = 0; x < n; ++x)
    for (std::size_t e = csr.row_ptr[x]; e < csr.row_ptr[x + 1]; ++e)
      out_rate[x] += csr.val[e];

  std::vector<double> pi(static_cast<std::size_t>(n), 0.0);
  if (n <= kDenseSolveCap) {
    // pi q = 0 with one balance column swapped for normalization:
    // row 0 reads sum_x pi(x) = 1, row y>0 reads the balance at y.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x) m(0, x) = 1.0;
    for (int x = 0; x < n; ++x) {
      if (x > 0) m(x, x) = -out_rate[x];
      for (std::size_t e = csr.row_ptr[x]; e < csr.row_ptr[x + 1]; ++e) {
        int y = csr.col[e];
        if (y > 0) m(y, x) += csr.val[e];
      }
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    Eigen::VectorXd sol = lu.solve(rhs);
    double err = (m * sol - rhs).cwiseAbs().maxCoeff();
    require(std::isfinite(err) && err < 1e-8, "SingularSystem",
            "stationary solve did not converge (residual " + std::to_string(err) + ")");
    for (int x = 0; x < n; ++x) pi[x] = sol(x);
  } else {
    // Power iteration on P = I + q/L (strictly positive diagonal so the
    // discrete chain is aperiodic), in the probability-vector direction.
    double qmax = 0.0;
    for (double r : out_rate) qmax = std::max(qmax, r);
    double lam = 1.1 * qmax + 1e-12;
    std::vector<double> v(static_cast<std::size_t>(n), 1.0 / n), next(static_cast<std::size_t>(n));
    const int max_iters = 500000;
    bool done = false;
    for (int it = 0; it < max_iters && !done; ++it) {
      for (int y = 0; y < n; ++y) next[y] = v[y] * (1.0 - out_rate[y] / lam);
      for (int x = 0; x < n; ++x) {
        double vx = v[x];
        if (vx == 0.0) continue;
        for (std::size_t e = csr.row_ptr[x]; e < csr.row_ptr[x + 1]; ++e)
          next[csr.col[e]] += vx * csr.val[e] / lam;
      }
      double sum = 0.0;
      for (double t : next) sum += t;
      for (double& t : next) t /= sum;
      std::swap(v, next);
      if (it % 8 == 0) {
        // balance residual max_y |sum_x v(x) q(x,y)|
        double resid = 0.0;
        std::vector<double> flow(static_cast<std::size_t>(n), 0.0);
        for (int y = 0; y < n; ++y) flow[y] = -v[y] * out_rate[y];
        for (int x = 0; x < n; ++x)
          for (std::size_t e = csr.row_ptr[x]; e < csr.row_ptr[x + 1]; ++e)
            flow[csr.col[e]] += v[x] * csr.val[e];
        for (double f : flow) resid = std::max(resid, std::fabs(f));
        if (resid <= 1e-12 * lam) done = true;
      }
    }
    require(done, "SingularSystem", "power iteration for pi did not converge");
    pi = v;
  }

  double sum = 0.0;
  for (double p : pi) {
    require(std::isfinite(p) && p > 0.0, "SingularSystem",
            "stationary solve returned a non-positive mass");
    sum += p;
  }
  for (double& p : pi) p /= sum;
  return pi;
}

}  // namespace

std::size_t group_size(const GroupHint& hint) {
  switch (hint.type) {
    case GroupHint::Type::cyclic: {
      std::size_t s = 1;
      for (int d : hint.dims) s *= static_cast<std::size_t>(d);
      return s;
    }
    case GroupHint::Type::bits:
      return std::size_t{1} << hint.nbits;
    case GroupHint::Type::none:
      return 0;
  }
  return 0;
}

int group_difference(const GroupHint& hint, int a, int b) {
  if (hint.type == GroupHint::Type::bits) return a ^ b;
  // cyclic, row-major mixed radix: peel digits from the innermost dimension.
  int diff = 0;
  int stride = 1;
  int ra = a, rb = b;
  std::vector<int> digits(hint.dims.size());
  for (std::size_t i = hint.dims.size(); i-- > 0;) {
    int d = hint.dims[i];
    int ca = ra % d, cb = rb % d;
    ra /= d;
    rb /= d;
    digits[i] = (cb - ca + d) % d;
  }
  for (std::size_t i = 0; i < hint.dims.size(); ++i) {
    diff = diff * hint.dims[i] + digits[i];
    (void)stride;
  }
  return diff;
}

int group_negate(const GroupHint& hint, int a) {
  if (hint.type == GroupHint::Type::bits) return a;
  int ra = a;
  std::vector<int> digits(hint.dims.size());
  for (std::size_t i = hint.dims.size(); i-- > 0;) {
    int d = hint.dims[i];
    int c = ra % d;
    ra /= d;
    digits[i] = (d - c) % d;
  }
  int out = 0;
  for (std::size_t i = 0; i < hint.dims.size(); ++i) out = out * hint.dims[i] + digits[i];
  return out;
}

int group_add(const GroupHint& hint, int a, int b) {
  if (hint.type == GroupHint::Type::bits) return a ^ b;
  int ra = a, rb = b;
  std::vector<int> digits(hint.dims.size());
  for (std::size_t i = hint.dims.size(); i-- > 0;) {
    int d = hint.dims[i];
    digits[i] = (ra % d + rb % d) % d;
    ra /= d;
    rb /= d;
  }
  int out = 0;
  for (std::size_t i = 0; i < hint.dims.size(); ++i) out = out * hint.dims[i] + digits[i];
  return out;
}

double Kernel::q(int x, int y) const {
  require(x >= 0 && x < n && y >= 0 && y < n, "BadIndex", "site index out of range");
  auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[x]);
  auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[x + 1]);
  auto it = std::lower_bound(first, last, y);
  if (it == last || *it != y) return 0.0;
  return rate[static_cast<std::size_t>(it - col.begin())];
}

int Kernel::sample_pi(Rng& rng) const { return static_cast<int>(pi_alias.sample(rng)); }

std::pair<int, int> Kernel::sample_pair(PairKind which, Rng& rng) const {
  if (which == PairKind::UU) {
    int a = sample_pi(rng);
    int b = sample_pi(rng);
    return {a, b};
  }
  require(has_pair_sampler(), "TooLarge",
          "pair-measure sampler unavailable (edge count above cap)");
  std::size_t slot = nu_alias.sample(rng);
  int x = static_cast<int>(std::upper_bound(row_ptr.begin(), row_ptr.end(), slot) -
                           row_ptr.begin()) - 1;
  return {x, col[slot]};
}

int Kernel::sample_target(int x, Rng& rng) const {
  std::size_t b = row_ptr[x], e = row_ptr[x + 1];
  require(e > b, "BadIndex", "site has no outgoing rates");
  double u = rng.u01() * total_rate[x];
  double acc = 0.0;
  for (std::size_t k = b; k + 1 < e; ++k) {
    acc += rate[k];
    if (u < acc) return col[k];
  }
  return col[e - 1];
}

Kernel build_from_rates(int n, const std::vector<RateEntry>& entries, GroupHint hint) {
  check_entries(n, entries);
  Csr csr = to_csr(n, entries);

  Kernel k;
  k.n = n;
  k.row_ptr = csr.row_ptr;
  k.col = csr.col;
  k.rate = csr.val;
  k.total_rate.assign(static_cast<std::size_t>(n), 0.0);
  for (int x = 0; x < n; ++x)
    for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
      k.total_rate[x] += k.rate[e];

  // Reverse adjacency by counting sort over target sites.
  k.in_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int y : k.col) k.in_ptr[static_cast<std::size_t>(y) + 1]++;
  for (int y = 0; y < n; ++y) k.in_ptr[y + 1] += k.in_ptr[y];
  k.in_src.resize(k.col.size());
  k.in_rate.resize(k.col.size());
  {
    std::vector<std::size_t> cursor(k.in_ptr.begin(), k.in_ptr.end() - 1);
    for (int x = 0; x < n; ++x)
      for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
        std::size_t slot = cursor[k.col[e]]++;
        k.in_src[slot] = x;
        k.in_rate[slot] = k.rate[e];
      }
  }

  require(reaches_all(n, k.row_ptr, k.col), "NotIrreducible",
          "rate support is not strongly connected (forward reachability fails)");
  require(reaches_all(n, k.in_ptr, k.in_src), "NotIrreducible",
          "rate support is not strongly connected (reverse reachability fails)");

  k.pi = stationary_from_csr(csr);

  // Balance residual max_y |(pi q)(y)| as a construction-time invariant.
  {
    std::vector<double> flow(static_cast<std::size_t>(n), 0.0);
    for (int y = 0; y < n; ++y) flow[y] = -k.pi[y] * k.total_rate[y];
    for (int x = 0; x < n; ++x)
      for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
        flow[k.col[e]] += k.pi[x] * k.rate[e];
    double resid = 0.0;
    for (double f : flow) resid = std::max(resid, std::fabs(f));
    require(resid <= kBalanceTol, "SingularSystem",
            "stationary balance residual " + std::to_string(resid) + " exceeds tolerance");
  }

  for (int x = 0; x < n; ++x) {
    k.pi_diag += k.pi[x] * k.pi[x];
    k.pi_max = std::max(k.pi_max, k.pi[x]);
    k.q_max = std::max(k.q_max, k.total_rate[x]);
    k.nu_total += k.pi[x] * k.pi[x] * k.total_rate[x];
  }
  require(k.nu_total > 0.0, "NotIrreducible", "pair measure has zero mass");

  // Detailed balance within absolute tolerance.
  {
    double worst = 0.0;
    for (int x = 0; x < n && worst <= kDetailedBalanceTol; ++x)
      for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
        int y = k.col[e];
        worst = std::max(worst, std::fabs(k.pi[x] * k.rate[e] - k.pi[y] * k.q(y, x)));
        if (worst > kDetailedBalanceTol) break;
      }
    k.reversible = worst <= kDetailedBalanceTol;
  }

  // Translation invariance: exact, entry-for-entry, before trusting a hint.
  if (hint.is_group() && group_size(hint) == static_cast<std::size_t>(n)) {
    bool ok = true;
    std::size_t deg0 = k.row_ptr[1] - k.row_ptr[0];
    for (int x = 0; x < n && ok; ++x) {
      if (k.row_ptr[x + 1] - k.row_ptr[x] != deg0) {
        ok = false;
        break;
      }
      for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
        int s = group_difference(hint, x, k.col[e]);
        if (k.q(0, s) != k.rate[e]) {  // exact: generators emit identical doubles
          ok = false;
          break;
        }
      }
    }
    hint.verified = ok;
  } else {
    hint.verified = false;
  }
  k.group = hint;

  k.pi_alias.build(k.pi);
  if (k.edge_count() > 0 && k.edge_count() <= kPairSamplerEdgeCap) {
    std::vector<double> w(k.edge_count());
    for (int x = 0; x < n; ++x)
      for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
        w[e] = k.pi[x] * k.pi[x] * k.rate[e];
    k.nu_alias.build(w);
  }
  return k;
}

Kernel build_from_adjacency(int n, const std::vector<AdjEntry>& entries) {
  require(n >= 2, "BadIndex", "adjacency needs at least two sites");
  std::map<std::pair<int, int>, long long> a;
  for (const auto& e : entries) {
    require(e.x >= 0 && e.x < n && e.y >= 0 && e.y < n, "BadIndex",
            "adjacency entry out of range");
    require(e.count >= 0, "AsymmetricAdjacency", "adjacency counts must be >= 0");
    if (e.count > 0) a[{e.x, e.y}] += e.count;
  }
  for (const auto& [xy, c] : a) {
    auto it = a.find({xy.second, xy.first});
    long long mirror = (it == a.end()) ? 0 : it->second;
    require(mirror == c, "AsymmetricAdjacency",
            "A(" + std::to_string(xy.first) + "," + std::to_string(xy.second) +
                ") = " + std::to_string(c) + " but transpose = " + std::to_string(mirror));
  }

  std::vector<long long> row_sum(static_cast<std::size_t>(n), 0);
  long long grand = 0;
  for (const auto& [xy, c] : a) {
    row_sum[xy.first] += c;
    grand += c;
  }
  for (int x = 0; x < n; ++x)
    require(row_sum[x] > 0, "ZeroDegree", "site " + std::to_string(x) + " has degree zero");

  // Connectivity on the off-diagonal support (undirected by symmetry).
  {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [xy, c] : a)
      if (xy.first != xy.second) adj[xy.first].push_back(xy.second);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int y : adj[x])
        if (!seen[y]) {
          seen[y] = 1;
          ++count;
          stack.push_back(y);
        }
    }
    require(count == n, "Disconnected", "adjacency graph is not connected");
  }

  std::vector<RateEntry> rates;
  rates.reserve(a.size());
  for (const auto& [xy, c] : a)
    if (xy.first != xy.second)
      rates.push_back({xy.first, xy.second,
                       static_cast<double>(c) / static_cast<double>(row_sum[xy.first])});

  Kernel k = build_from_rates(n, rates);
  // The walk on a multigraph has the exact closed-form stationary law
  // pi(x) = A(x)/sum_z A(z); install it (the solver's answer matches to
  // rounding, this is just the cleaner constant).
  for (int x = 0; x < n; ++x)
    k.pi[x] = static_cast<double>(row_sum[x]) / static_cast<double>(grand);
  k.pi_diag = 0.0;
  k.pi_max = 0.0;
  k.nu_total = 0.0;
  for (int x = 0; x < n; ++x) {
    k.pi_diag += k.pi[x] * k.pi[x];
    k.pi_max = std::max(k.pi_max, k.pi[x]);
    k.nu_total += k.pi[x] * k.pi[x] * k.total_rate[x];
  }
  k.reversible = true;  // pi(x) q(x,y) = A(x,y)/grand is symmetric by construction
  k.pi_alias.build(k.pi);
  if (k.edge_count() > 0 && k.edge_count() <= kPairSamplerEdgeCap) {
    std::vector<double> w(k.edge_count());
    for (int x = 0; x < k.n; ++x)
      for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
        w[e] = k.pi[x] * k.pi[x] * k.rate[e];
    k.nu_alias.build(w);
  }
  return k;
}

std::vector<double> stationary_distribution(int n, const std::vector<RateEntry>& entries) {
  check_entries(n, entries);
  Csr csr = to_csr(n, entries);
  require(reaches_all(n, csr.row_ptr, csr.col), "NotIrreducible",
          "rate support is not strongly connected");
  return stationary_from_csr(csr);
}

PairMeasure pair_measure(const Kernel& k) {
  PairMeasure pm;
  pm.pairs.reserve(k.edge_count());
  pm.weight.reserve(k.edge_count());
  double total = 0.0;
  for (int x = 0; x < k.n; ++x)
    for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
      total += k.pi[x] * k.pi[x] * k.rate[e];
  for (int x = 0; x < k.n; ++x)
    for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
      pm.pairs.emplace_back(x, k.col[e]);
      pm.weight.push_back(k.pi[x] * k.pi[x] * k.rate[e] / total);
    }
  return pm;
}

void save_kernel(const Kernel& k, std::ostream& out) {
  out << "# sites=" << k.n << " entries=" << k.edge_count() << "\n";
  if (k.group.verified) {
    if (k.group.type == GroupHint::Type::cyclic) {
      out << "# group cyclic";
      for (int d : k.group.dims) out << ' ' << d;
      out << "\n";
    } else if (k.group.type == GroupHint::Type::bits) {
      out << "# group bits " << k.group.nbits << "\n";
    }
  }
  out << k.n << "\n";
  char buf[64];
  for (int x = 0; x < k.n; ++x)
    for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
      std::snprintf(buf, sizeof(buf), "%.17g", k.rate[e]);
      out << x << ' ' << k.col[e] << ' ' << buf << "\n";
    }
}

void save_kernel(const Kernel& k, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "BadParam", "cannot open " + path + " for writing");
  save_kernel(k, out);
  out.flush();
  require(out.good(), "BadParam", "write to " + path + " failed");
}

Kernel load_kernel(std::istream& in) {
  GroupHint hint;
  int n = -1;
  std::vector<RateEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '#') {
      std::istringstream hs(line.substr(pos + 1));
      std::string word;
      if (hs >> word && word == "group") {
        std::string kind;
        hs >> kind;
        if (kind == "cyclic") {
          hint.type = GroupHint::Type::cyclic;
          hint.dims.clear();
          int d;
          while (hs >> d) hint.dims.push_back(d);
        } else if (kind == "bits") {
          hint.type = GroupHint::Type::bits;
          hs >> hint.nbits;
        }
      }
      continue;
    }
    std::istringstream ls(line);
    if (n < 0) {
      require(static_cast<bool>(ls >> n), "BadParam", "kernel file: bad site-count line");
      continue;
    }
    RateEntry e;
    require(static_cast<bool>(ls >> e.from >> e.to >> e.rate), "BadParam",
            "kernel file: bad entry line '" + line + "'");
    entries.push_back(e);
  }
  require(n >= 2, "BadParam", "kernel file has no site-count line");
  return build_from_rates(n, entries, hint);
}

Kernel load_kernel(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "BadParam", "cannot open " + path);
  return load_kernel(in);
}

}  // namespace vm
