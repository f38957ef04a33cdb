#include "voter/exact_meeting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "voter/analysis.hpp"
#include "voter/ctmc.hpp"

namespace vm {

namespace {

constexpr int kFullRouteCap = 64;      // product chain has n(n-1) transient states
constexpr int kReducedRouteCap = 4096; // difference walk solved densely

// Rates of the difference walk: step s at rate q(0,s) + q(0,-s).
std::vector<std::pair<int, double>> difference_offsets(const Kernel& k) {
  std::vector<double> comb(static_cast<std::size_t>(k.n), 0.0);
  for (std::size_t e = k.row_ptr[0]; e < k.row_ptr[1]; ++e) {
    comb[k.col[e]] += k.rate[e];
    comb[group_negate(k.group, k.col[e])] += k.rate[e];
  }
  std::vector<std::pair<int, double>> out;
  for (int s = 1; s < k.n; ++s)
    if (comb[s] > 0.0) out.emplace_back(s, comb[s]);
  return out;
}

int pair_index(int n, int x, int y) { return x * (n - 1) + (y < x ? y : y - 1); }

// Absorbing difference walk on the group (state 0 absorbing).
SparseGen difference_walk_gen(const Kernel& k) {
  auto offsets = difference_offsets(k);
  SparseGen g;
  g.n = k.n;
  g.row_ptr.assign(static_cast<std::size_t>(k.n) + 1, 0);
  g.col.reserve(static_cast<std::size_t>(k.n - 1) * offsets.size());
  g.rate.reserve(g.col.capacity());
  for (int z = 0; z < k.n; ++z) {
    if (z > 0)
      for (const auto& [s, w] : offsets) {
        g.col.push_back(group_add(k.group, z, s));
        g.rate.push_back(w);
      }
    g.row_ptr[static_cast<std::size_t>(z) + 1] = g.col.size();
  }
  g.finish();
  return g;
}

// Absorbing product chain on n^2 states, index x*n + y, diagonal absorbing.
SparseGen product_gen(const Kernel& k) {
  SparseGen g;
  int n = k.n;
  g.n = n * n;
  g.row_ptr.assign(static_cast<std::size_t>(g.n) + 1, 0);
  std::size_t nnz = 0;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y)
        nnz += (k.row_ptr[x + 1] - k.row_ptr[x]) + (k.row_ptr[y + 1] - k.row_ptr[y]);
  g.col.reserve(nnz);
  g.rate.reserve(nnz);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      if (x != y) {
        for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
          g.col.push_back(k.col[e] * n + y);
          g.rate.push_back(k.rate[e]);
        }
        for (std::size_t e = k.row_ptr[y]; e < k.row_ptr[y + 1]; ++e) {
          g.col.push_back(x * n + k.col[e]);
          g.rate.push_back(k.rate[e]);
        }
      }
      g.row_ptr[static_cast<std::size_t>(x) * n + y + 1] = g.col.size();
    }
  g.finish();
  return g;
}

std::vector<double> pair_init_reduced(const Kernel& k, PairKind which) {
  std::vector<double> dist(static_cast<std::size_t>(k.n), 0.0);
  if (which == PairKind::UU) {
    // difference of two independent uniform draws is uniform
    std::fill(dist.begin(), dist.end(), 1.0 / k.n);
  } else {
    // difference under the pair measure has law q(0,s)/q(0)
    double c = k.total_rate[0];
    for (std::size_t e = k.row_ptr[0]; e < k.row_ptr[1]; ++e)
      dist[k.col[e]] += k.rate[e] / c;
  }
  return dist;
}

std::vector<double> pair_init_full(const Kernel& k, PairKind which) {
  int n = k.n;
  std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
  if (which == PairKind::UU) {
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) dist[static_cast<std::size_t>(x) * n + y] = k.pi[x] * k.pi[y];
  } else {
    for (int x = 0; x < n; ++x)
      for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
        dist[static_cast<std::size_t>(x) * n + k.col[e]] =
            k.pi[x] * k.pi[x] * k.rate[e] / k.nu_total;
  }
  return dist;
}

bool use_reduced(const Kernel& k) { return k.group.verified && k.n <= kReducedRouteCap; }

double off_diagonal_mass(const std::vector<double>& dist, int n) {
  double s = 0.0;
  for (int x = 0; x < n; ++x) {
    const double* row = dist.data() + static_cast<std::size_t>(x) * n;
    for (int y = 0; y < n; ++y)
      if (y != x) s += row[y];
  }
  return s;
}

}  // namespace

double MeetingSolution::mean_meeting(int x, int y) const {
  require(x >= 0 && x < n && y >= 0 && y < n, "BadIndex", "site out of range");
  if (x == y) return 0.0;
  if (reduced) return h1_store[group_difference(group, x, y)];
  return h1_store[static_cast<std::size_t>(x) * n + y];
}

double MeetingSolution::second_moment(int x, int y) const {
  require(x >= 0 && x < n && y >= 0 && y < n, "BadIndex", "site out of range");
  if (x == y) return 0.0;
  if (reduced) return h2_store[group_difference(group, x, y)];
  return h2_store[static_cast<std::size_t>(x) * n + y];
}

MeetingSolution meeting_moments_reduced(const Kernel& k) {
  require(k.group.verified, "StrategyMismatch",
          "difference-walk route needs a verified translation-invariant kernel");
  require(k.n <= kReducedRouteCap, "TooLarge",
          "difference-walk dense solve capped at 4096 sites");
  const int n = k.n;
  auto offsets = difference_offsets(k);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n - 1, n - 1);
  double total = 0.0;
  for (const auto& [s, w] : offsets) total += w;
  for (int z = 1; z < n; ++z) {
    a(z - 1, z - 1) = total;
    for (const auto& [s, w] : offsets) {
      int tgt = group_add(k.group, z, s);
      if (tgt != 0) a(z - 1, tgt - 1) -= w;
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd h1 = lu.solve(Eigen::VectorXd::Ones(n - 1));
  Eigen::VectorXd h2 = lu.solve(2.0 * h1);

  MeetingSolution sol;
  sol.n = n;
  sol.reduced = true;
  sol.group = k.group;
  sol.h1_store.assign(static_cast<std::size_t>(n), 0.0);
  sol.h2_store.assign(static_cast<std::size_t>(n), 0.0);
  for (int z = 1; z < n; ++z) {
    require(h1(z - 1) >= 0.0 && h2(z - 1) >= 0.0, "SingularSystem",
            "meeting moments came out negative");
    sol.h1_store[z] = h1(z - 1);
    sol.h2_store[z] = h2(z - 1);
  }
  double sum = 0.0;
  for (int z = 1; z < n; ++z) sum += sol.h1_store[z];
  sol.t_meet = sum / n;
  double c = k.total_rate[0];
  for (std::size_t e = k.row_ptr[0]; e < k.row_ptr[1]; ++e) {
    sol.mvv_mean += k.rate[e] / c * sol.h1_store[k.col[e]];
    sol.mvv_second += k.rate[e] / c * sol.h2_store[k.col[e]];
  }
  return sol;
}

MeetingSolution meeting_moments_full(const Kernel& k) {
  require(k.n <= kFullRouteCap, "TooLarge", "dense product solve capped at 64 sites");
  const int n = k.n;
  const int p = n * (n - 1);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      if (x == y) continue;
      int i = pair_index(n, x, y);
      a(i, i) = k.total_rate[x] + k.total_rate[y];
      for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
        int z = k.col[e];
        if (z != y) a(i, pair_index(n, z, y)) -= k.rate[e];
      }
      for (std::size_t e = k.row_ptr[y]; e < k.row_ptr[y + 1]; ++e) {
        int z = k.col[e];
        if (z != x) a(i, pair_index(n, x, z)) -= k.rate[e];
      }
    }
  Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>> lu(a);  // factor in place
  Eigen::VectorXd h1 = lu.solve(Eigen::VectorXd::Ones(p));
  Eigen::VectorXd h2 = lu.solve(2.0 * h1);

  MeetingSolution sol;
  sol.n = n;
  sol.reduced = false;
  sol.h1_store.assign(static_cast<std::size_t>(n) * n, 0.0);
  sol.h2_store.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      if (x == y) continue;
      int i = pair_index(n, x, y);
      require(h1(i) >= 0.0 && h2(i) >= 0.0, "SingularSystem",
              "meeting moments came out negative");
      sol.h1_store[static_cast<std::size_t>(x) * n + y] = h1(i);
      sol.h2_store[static_cast<std::size_t>(x) * n + y] = h2(i);
    }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      sol.t_meet += k.pi[x] * k.pi[y] * sol.h1_store[static_cast<std::size_t>(x) * n + y];
  for (int x = 0; x < n; ++x)
    for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
      double w = k.pi[x] * k.pi[x] * k.rate[e] / k.nu_total;
      sol.mvv_mean += w * sol.h1_store[static_cast<std::size_t>(x) * n + k.col[e]];
      sol.mvv_second += w * sol.h2_store[static_cast<std::size_t>(x) * n + k.col[e]];
    }
  return sol;
}

MeetingSolution meeting_moments(const Kernel& k) {
  if (use_reduced(k)) return meeting_moments_reduced(k);
  if (k.n <= kFullRouteCap) return meeting_moments_full(k);
  fail("TooLarge",
       "meeting moments need n <= 64 (dense product) or a verified translation-"
       "invariant kernel with n <= 4096");
}

IdentityRecord identity_check(const Kernel& k, const MeetingSolution& sol) {
  IdentityRecord rec;
  rec.mvv_mean_target = (1.0 - k.pi_diag) / (2.0 * k.nu_total);
  rec.mvv_mean_residual = std::fabs(sol.mvv_mean - rec.mvv_mean_target) / rec.mvv_mean_target;
  rec.tmeet_target = k.nu_total * sol.mvv_second;
  rec.tmeet_residual = std::fabs(sol.t_meet - rec.tmeet_target) / rec.tmeet_target;
  double half_survival = (1.0 - k.pi_diag) / 2.0;
  rec.lower_bound = half_survival * half_survival / k.nu_total;
  rec.lower_bound_ok = sol.t_meet >= rec.lower_bound - 1e-9 * std::max(1.0, rec.lower_bound);
  return rec;
}

std::vector<double> meeting_tail(const Kernel& k, PairKind which,
                                 const std::vector<double>& times) {
  std::vector<double> tails(times.size(), 0.0);
  if (use_reduced(k)) {
    SparseGen g = difference_walk_gen(k);
    evolve_on_grid(g, pair_init_reduced(k, which), times,
                   [&](std::size_t i, const std::vector<double>& dist) {
                     double alive = 0.0;
                     for (int z = 1; z < k.n; ++z) alive += dist[z];
                     tails[i] = alive;
                   });
    return tails;
  }
  require(k.n <= kFullRouteCap, "TooLarge",
          "meeting tails need n <= 64 or a verified translation-invariant kernel");
  SparseGen g = product_gen(k);
  evolve_on_grid(g, pair_init_full(k, which), times,
                 [&](std::size_t i, const std::vector<double>& dist) {
                   tails[i] = off_diagonal_mass(dist, k.n);
                 });
  return tails;
}

TailRelationRecord tail_relation_check(const Kernel& k, const std::vector<double>& times) {
  require(!times.empty(), "BadParam", "need a nonempty time grid");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    require(times[i] < times[i + 1], "BadParam", "grid must be strictly ascending");
  require(times.front() >= 0.0, "BadParam", "grid times must be >= 0");

  // Refine with interval midpoints (and an initial segment from 0 when the
  // grid starts later) so each interval gets a Simpson rule.
  std::vector<double> grid;
  bool prepended = times.front() > 0.0;
  if (prepended) grid.push_back(0.0);
  for (double t : times) grid.push_back(t);
  std::vector<double> fine;
  fine.reserve(grid.size() * 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) fine.push_back(0.5 * (grid[i - 1] + grid[i]));
    fine.push_back(grid[i]);
  }

  std::vector<double> uu = meeting_tail(k, PairKind::UU, fine);
  std::vector<double> vv = meeting_tail(k, PairKind::VV, fine);

  TailRelationRecord rec;
  rec.residual.resize(times.size());
  double integral = 0.0;  // int_0^{grid[i]} P(M_vv > s) ds
  std::size_t out = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::size_t at = 2 * i;  // index of grid[i] in `fine`
    if (i > 0) {
      double h = grid[i] - grid[i - 1];
      integral += h / 6.0 * (vv[at - 2] + 4.0 * vv[at - 1] + vv[at]);
    }
    if (prepended && i == 0) continue;
    double lhs = uu[at];
    double rhs = 1.0 - k.pi_diag - 2.0 * k.nu_total * integral;
    rec.residual[out++] = std::fabs(lhs - rhs);
  }
  for (double r : rec.residual) rec.max_residual = std::max(rec.max_residual, r);
  return rec;
}

bool tail_markov_bound_ok(const Kernel& k, const std::vector<double>& times, double slack) {
  std::vector<double> vv = meeting_tail(k, PairKind::VV, times);
  for (std::size_t i = 0; i < times.size(); ++i)
    if (2.0 * k.nu_total * times[i] * vv[i] > 1.0 - k.pi_diag + slack) return false;
  return true;
}

std::vector<double> dual_pair_distribution(const Kernel& k, PairKind which, double t) {
  require(k.n <= kFullRouteCap, "TooLarge",
          "joint pair laws need the dense product chain (n <= 64)");
  SparseGen g = product_gen(k);
  std::vector<double> dist = pair_init_full(k, which);
  evolve_distribution(g, dist, t);
  return dist;
}

double dual_pair_expectation(const Kernel& k, const std::vector<std::uint8_t>& xi,
                             DualObservable which, double t) {
  require(xi.size() == static_cast<std::size_t>(k.n), "BadParam",
          "configuration size does not match kernel");
  PairKind init = (which == DualObservable::p1p0) ? PairKind::UU : PairKind::VV;
  std::vector<double> dist = dual_pair_distribution(k, init, t);
  double s = 0.0;
  for (int a = 0; a < k.n; ++a)
    for (int b = 0; b < k.n; ++b) {
      if (a == b) continue;
      double w = (which == DualObservable::p01)
                     ? (1.0 - xi[a]) * static_cast<double>(xi[b])
                     : static_cast<double>(xi[a]) * (1.0 - xi[b]);
      s += dist[static_cast<std::size_t>(a) * k.n + b] * w;
    }
  return s;
}

PairBoundRecord pair_correlation_bound_check(
    const Kernel& k, double s, double t,
    const std::vector<std::vector<std::uint8_t>>& configs) {
  require(0.0 < s && s < t, "BadParam", "need 0 < s < t");
  PairBoundRecord rec;
  auto tails = meeting_tail(k, PairKind::VV, {s, t});
  rec.tail_s = tails[0];
  rec.tail_t = tails[1];
  rec.d_e = tv_distance(k, t - s);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.gap = k.reversible ? spectral_gap(k) : nan;

  std::vector<double> mu_t = dual_pair_distribution(k, PairKind::VV, t);
  double window = rec.tail_s - rec.tail_t;  // P(M_vv in (s,t])
  double bound_basic = window + 4.0 * rec.tail_s * rec.d_e;
  double bound_rev = k.reversible
                         ? window + (2.0 * k.pi_max * k.q_max / k.nu_total) *
                                        std::exp(-rec.gap * (t - s))
                         : nan;

  rec.min_margin_basic = std::numeric_limits<double>::infinity();
  rec.min_margin_reversible =
      k.reversible ? std::numeric_limits<double>::infinity() : nan;
  for (const auto& xi : configs) {
    require(xi.size() == static_cast<std::size_t>(k.n), "BadParam",
            "configuration size does not match kernel");
    double p10_exact = 0.0;
    for (int a = 0; a < k.n; ++a) {
      if (!xi[a]) continue;
      const double* row = mu_t.data() + static_cast<std::size_t>(a) * k.n;
      for (int b = 0; b < k.n; ++b)
        if (b != a && !xi[b]) p10_exact += row[b];
    }
    double p1 = 0.0;
    for (int i = 0; i < k.n; ++i)
      if (xi[i]) p1 += k.pi[i];
    double lhs = std::fabs(p10_exact - rec.tail_s * p1 * (1.0 - p1));
    rec.lhs.push_back(lhs);
    rec.bound_basic.push_back(bound_basic);
    rec.margin_basic.push_back(bound_basic - lhs);
    rec.min_margin_basic = std::min(rec.min_margin_basic, bound_basic - lhs);
    if (k.reversible) {
      rec.bound_reversible.push_back(bound_rev);
      rec.margin_reversible.push_back(bound_rev - lhs);
      rec.min_margin_reversible = std::min(rec.min_margin_reversible, bound_rev - lhs);
    }
  }
  return rec;
}

std::vector<std::vector<std::uint8_t>> default_bound_configs(const Kernel& k,
                                                             std::uint64_t seed, int sampled) {
  std::vector<std::vector<std::uint8_t>> configs;
  if (k.n <= 12) {
    std::size_t total = std::size_t{1} << k.n;
    configs.reserve(total);
    for (std::size_t mask = 0; mask < total; ++mask) {
      std::vector<std::uint8_t> xi(static_cast<std::size_t>(k.n), 0);
      for (int i = 0; i < k.n; ++i) xi[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
      configs.push_back(std::move(xi));
    }
    return configs;
  }
  configs.reserve(static_cast<std::size_t>(sampled) + 2);
  for (int r = 0; r < sampled; ++r) {
    Rng rng = Rng::for_replica(seed, static_cast<std::uint64_t>(r));
    std::vector<std::uint8_t> xi(static_cast<std::size_t>(k.n), 0);
    for (int i = 0; i < k.n; ++i) xi[i] = rng.u01() < 0.5 ? 1 : 0;
    configs.push_back(std::move(xi));
  }
  configs.emplace_back(static_cast<std::size_t>(k.n), 0);
  configs.emplace_back(static_cast<std::size_t>(k.n), 1);
  return configs;
}

}  // namespace vm
