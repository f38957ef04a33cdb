#include "voter/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "voter/ctmc.hpp"
#include "voter/parallel.hpp"

namespace vm {

namespace {

constexpr int kDenseEigenCap = 4096;
constexpr int kDenseRowCap = 4096;
constexpr double kGapResidualTol = 1e-10;

void require_reversible(const Kernel& k) {
  require(k.reversible, "NotReversible",
          "spectral gap is defined here only for reversible kernels");
}

// y = S x with S = D^{1/2}(-q)D^{-1/2}: S(x,x) = q(x),
// S(x,y) = -q(x,y) sqrt(pi(x)/pi(y)).
void sym_matvec(const Kernel& k, const std::vector<double>& sqrt_pi,
                const std::vector<double>& x, std::vector<double>& y) {
  for (int i = 0; i < k.n; ++i) y[i] = k.total_rate[i] * x[i];
  for (int i = 0; i < k.n; ++i) {
    double xi = x[i];
    for (std::size_t e = k.row_ptr[i]; e < k.row_ptr[i + 1]; ++e) {
      int j = k.col[e];
      y[j] -= k.rate[e] * (sqrt_pi[i] / sqrt_pi[j]) * xi;
    }
  }
}

double spectral_gap_dense(const Kernel& k) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k.n, k.n);
  std::vector<double> sqrt_pi(k.pi.size());
  for (std::size_t i = 0; i < k.pi.size(); ++i) sqrt_pi[i] = std::sqrt(k.pi[i]);
  for (int x = 0; x < k.n; ++x) {
    s(x, x) = k.total_rate[x];
    for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
      int y = k.col[e];
      s(x, y) = -k.rate[e] * sqrt_pi[x] / sqrt_pi[y];
    }
  }
  Eigen::MatrixXd sym = 0.5 * (s + s.transpose());  // shed rounding asymmetry
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, "ConvergenceFailure", "dense eigensolve failed");
  return solver.eigenvalues()(1);
}

}  // namespace

double spectral_gap_lanczos(const Kernel& k) {
  require_reversible(k);
  require(k.n <= (1 << 18), "TooLarge", "Lanczos gap capped at 2^18 sites");
  const int n = k.n;
  std::vector<double> sqrt_pi(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) sqrt_pi[i] = std::sqrt(k.pi[i]);

  // Known null vector of S; everything is kept orthogonal to it, so the
  // smallest Ritz value converges to the gap.
  std::vector<double> v0 = sqrt_pi;
  {
    double norm = 0.0;
    for (double x : v0) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v0) x /= norm;
  }
  double gersh = 0.0;
  for (int i = 0; i < n; ++i) gersh = std::max(gersh, 2.0 * k.total_rate[i]);

  const int m_cap = 150;
  std::vector<std::vector<double>> basis;
  basis.reserve(m_cap);
  std::vector<double> alpha, beta;

  auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  };
  auto axpy = [n](double c, const std::vector<double>& x, std::vector<double>& y) {
    for (int i = 0; i < n; ++i) y[i] += c * x[i];
  };

  // Deterministic start, orthogonal to v0.
  std::vector<double> v(static_cast<std::size_t>(n));
  {
    Rng rng(0x5eedu);
    for (int i = 0; i < n; ++i) v[i] = rng.u01() - 0.5;
    axpy(-dot(v0, v), v0, v);
    double norm = std::sqrt(dot(v, v));
    for (double& x : v) x /= norm;
  }

  std::vector<double> w(static_cast<std::size_t>(n));
  double last_theta = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m_cap; ++j) {
    basis.push_back(v);
    sym_matvec(k, sqrt_pi, v, w);
    if (j > 0) axpy(-beta[j - 1], basis[j - 1], w);
    double a = dot(v, w);
    alpha.push_back(a);
    axpy(-a, v, w);
    // Full reorthogonalization (v0 included); robust at these sizes.
    axpy(-dot(v0, w), v0, w);
    for (const auto& b : basis) axpy(-dot(b, w), b, w);
    double nb = std::sqrt(dot(w, w));
    beta.push_back(nb);

    if (j >= 1) {
      int m = j + 1;
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      double theta = es.eigenvalues()(0);
      double resid = nb * std::fabs(es.eigenvectors()(m - 1, 0));
      if (resid <= kGapResidualTol * std::max(1.0, gersh) &&
          std::fabs(theta - last_theta) <= 1e-12 * std::max(1.0, gersh)) {
        return theta;
      }
      last_theta = theta;
    }
    if (nb <= 1e-14 * std::max(1.0, gersh)) {
      // Krylov space exhausted: the tridiagonal spectrum is exact.
      int m = j + 1;
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      return es.eigenvalues()(0);
    }
    for (int i = 0; i < n; ++i) v[i] = w[i] / nb;
  }
  fail("ConvergenceFailure", "Lanczos gap iteration did not converge");
}

double spectral_gap(const Kernel& k) {
  require_reversible(k);
  if (k.n <= kDenseEigenCap) return spectral_gap_dense(k);
  return spectral_gap_lanczos(k);
}

namespace {

struct TvEvaluator {
  const Kernel& k;
  SparseGen gen;

  explicit TvEvaluator(const Kernel& kernel) : k(kernel), gen(generator_of(kernel)) {
    require(k.n <= kDenseRowCap, "TooLarge",
            "total variation rows capped at 4096 states");
  }

  double row(int x, double t) const {
    std::vector<double> dist(static_cast<std::size_t>(k.n), 0.0);
    dist[x] = 1.0;
    evolve_distribution(gen, dist, t);
    double s = 0.0;
    for (int y = 0; y < k.n; ++y) s += std::fabs(dist[y] - k.pi[y]);
    return 0.5 * s;
  }

  double operator()(double t) const {
    if (k.group.verified) return row(0, t);  // all rows agree by invariance
    std::vector<double> vals(static_cast<std::size_t>(k.n), 0.0);
    parallel_for(static_cast<std::size_t>(k.n), default_threads(),
                 [&](std::size_t x) { vals[x] = row(static_cast<int>(x), t); });
    double worst = 0.0;
    for (double v : vals) worst = std::max(worst, v);  // index order
    return worst;
  }
};

}  // namespace

double tv_distance(const Kernel& k, double t) {
  require(t >= 0.0, "BadParam", "time must be >= 0");
  return TvEvaluator(k)(t);
}

double mixing_time(const Kernel& k) {
  TvEvaluator d(k);
  double hi = 1.0 / std::max(k.q_max, 1e-300);
  int doublings = 0;
  while (d(hi) > kMixingThreshold) {
    hi *= 2.0;
    require(++doublings < 120, "ConvergenceFailure", "mixing-time bracket diverged");
  }
  double lo = 0.0;
  if (doublings > 0) lo = hi / 2.0;
  while (hi - lo > 1e-6 * hi) {
    double mid = 0.5 * (lo + hi);
    (d(mid) <= kMixingThreshold ? hi : lo) = mid;
  }
  return hi;
}

double bottleneck_ratio(const Kernel& k, const std::vector<int>& sites) {
  require(!sites.empty(), "EmptySet", "bottleneck set must be nonempty");
  std::vector<char> in_set(static_cast<std::size_t>(k.n), 0);
  int distinct = 0;
  for (int x : sites) {
    require(x >= 0 && x < k.n, "BadIndex", "bottleneck set index out of range");
    if (!in_set[x]) {
      in_set[x] = 1;
      ++distinct;
    }
  }
  require(distinct < k.n, "FullSet", "bottleneck set must be a proper subset");

  double mass = 0.0, flow = 0.0;
  for (int x = 0; x < k.n; ++x) {
    if (!in_set[x]) continue;
    mass += k.pi[x];
    for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
      if (!in_set[k.col[e]]) flow += k.pi[x] * k.rate[e];
  }
  return flow / mass;
}

BottleneckResult bottleneck_optimum(const Kernel& k, BottleneckStrategy strategy) {
  BottleneckResult best;
  best.phi = std::numeric_limits<double>::infinity();

  if (strategy == BottleneckStrategy::intervals_1d) {
    require(k.group.verified && k.group.type == GroupHint::Type::cyclic &&
                k.group.dims.size() == 1,
            "StrategyMismatch",
            "interval scan needs a verified 1-d translation-invariant kernel");
    std::vector<int> interval;
    for (int kk = 1; kk <= k.n / 2; ++kk) {
      interval.push_back(kk - 1);
      double phi = bottleneck_ratio(k, interval);
      if (phi < best.phi) {
        best.phi = phi;
        best.witness = interval;
      }
    }
    return best;
  }

  require(k.n <= 22, "TooLargeForExhaustive", "exhaustive subset scan capped at n = 22");
  const std::uint32_t all = (k.n == 32) ? 0xffffffffu : ((1u << k.n) - 1u);
  for (std::uint32_t mask = 1; mask < all; ++mask) {
    double mass = 0.0, flow = 0.0;
    for (std::uint32_t bits = mask; bits;) {
      int x = std::countr_zero(bits);
      bits &= bits - 1;
      mass += k.pi[x];
      if (mass > 0.5 + 1e-12) break;
      for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
        if (!((mask >> k.col[e]) & 1u)) flow += k.pi[x] * k.rate[e];
    }
    if (mass > 0.5 + 1e-12) continue;
    double phi = flow / mass;
    if (phi < best.phi) {
      best.phi = phi;
      best.witness.clear();
      for (int x = 0; x < k.n; ++x)
        if ((mask >> x) & 1u) best.witness.push_back(x);
    }
  }
  return best;
}

CheegerResult cheeger_check(const Kernel& k) {
  CheegerResult r;
  r.gap = spectral_gap(k);
  bool one_dim = k.group.verified && k.group.type == GroupHint::Type::cyclic &&
                 k.group.dims.size() == 1;
  r.phi_star = bottleneck_optimum(
                   k, one_dim ? BottleneckStrategy::intervals_1d : BottleneckStrategy::exhaustive)
                   .phi;
  r.bound_ok = r.gap >= r.phi_star * r.phi_star / 2.0 - 1e-9;
  return r;
}

ConditionReport condition_report(const Kernel& k, double t_meet) {
  require(t_meet > 0.0, "BadParam", "expected meeting time must be positive");
  ConditionReport r;
  r.pi_diag = k.pi_diag;
  r.pi_max = k.pi_max;
  r.q_max = k.q_max;
  r.t_meet = t_meet;
  r.t_mix = mixing_time(k);
  r.ratio_mix = r.t_mix / t_meet;
  r.reversible = k.reversible;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (k.reversible) {
    r.gap = spectral_gap(k);
    r.gap_tmeet = r.gap * t_meet;
    double arg = std::max(std::exp(1.0), t_meet * k.pi_max * k.q_max);
    r.logterm = std::log(arg) / (r.gap * t_meet);
  } else {
    r.gap = nan;
    r.gap_tmeet = nan;
    r.logterm = nan;
  }
  // Descriptive single-instance flags; ladder trends are the real judgement.
  constexpr double small = 0.2;
  r.flag_i = r.pi_diag <= small && r.ratio_mix <= small;
  r.flag_ii = r.reversible && r.pi_diag <= small && r.logterm <= small;
  return r;
}

}  // namespace vm
