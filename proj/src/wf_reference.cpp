#include "voter/wf_reference.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

namespace vm {

namespace {

using quad = boost::multiprecision::cpp_bin_float_quad;

constexpr int kOrderCap = 100;

double rate_of(int j) { return 0.5 * static_cast<double>(j) * static_cast<double>(j - 1); }

}  // namespace

double wf_moment(double u, int k, double t) {
  require(u >= 0.0 && u <= 1.0, "BadParam", "initial value must lie in [0,1]");
  require(k >= 1, "BadParam", "moment order must be >= 1");
  require(t >= 0.0, "BadParam", "time must be >= 0");
  require(k <= kOrderCap, "Overflow",
          "moment order capped at 100 (expansion coefficients overflow)");
  if (k == 1) return u;  // the mean is conserved
  if (t == 0.0) return std::pow(u, k);

  // p_j(t) = sum_{i >= j} A(j,i) e^{-lambda_i t} with lambda_j = j(j-1)/2.
  // Recursion downward in j:
  //   A(j,i) = lambda_{j+1} A(j+1,i) / (lambda_j - lambda_i),  i > j,
  //   A(j,j) = [j == k] - sum_{i > j} A(j,i).
  // The coefficients reach ~1e13 with alternating signs by k = 100, hence
  // the 113-bit floats and compensated sums.
  std::vector<quad> lambda(static_cast<std::size_t>(k) + 1);
  for (int j = 1; j <= k; ++j) lambda[j] = quad(j) * quad(j - 1) / 2;

  // a[j-1][i-j] holds A(j,i).
  std::vector<std::vector<quad>> a(static_cast<std::size_t>(k));
  a[k - 1] = {quad(1)};
  for (int j = k - 1; j >= 1; --j) {
    auto& row = a[j - 1];
    row.assign(static_cast<std::size_t>(k - j) + 1, quad(0));
    quad kahan_sum = 0, kahan_c = 0;
    for (int i = j + 1; i <= k; ++i) {
      quad v = lambda[j + 1] * a[j][i - (j + 1)] / (lambda[j] - lambda[i]);
      row[i - j] = v;
      quad y = v - kahan_c;
      quad s = kahan_sum + y;
      kahan_c = (s - kahan_sum) - y;
      kahan_sum = s;
    }
    row[0] = quad(j == k ? 1 : 0) - kahan_sum;
  }

  // m(t) = sum_j u^j p_j(t); regroup as sum_i e^{-lambda_i t} sum_{j <= i} u^j A(j,i).
  quad uu = quad(u);
  quad result = 0, comp = 0;
  quad upow = uu;  // u^j
  for (int j = 1; j <= k; ++j) {
    quad pj = 0, pj_c = 0;
    for (int i = j; i <= k; ++i) {
      quad term = a[j - 1][i - j] * exp(-lambda[i] * quad(t));
      quad y = term - pj_c;
      quad s = pj + y;
      pj_c = (s - pj) - y;
      pj = s;
    }
    quad term = upow * pj;
    quad y = term - comp;
    quad s = result + y;
    comp = (s - result) - y;
    result = s;
    upow *= uu;
  }
  double out = static_cast<double>(result);
  // Guard against the tiniest negative rounding on degenerate inputs.
  if (out < 0.0 && out > -1e-15) out = 0.0;
  return out;
}

std::vector<double> death_chain_dist(int k, double t) {
  require(k >= 1, "BadParam", "need k >= 1");
  require(t >= 0.0, "BadParam", "time must be >= 0");
  std::vector<double> p(static_cast<std::size_t>(k), 0.0);
  p[k - 1] = 1.0;
  if (k == 1 || t == 0.0) return p;

  // Uniformization of the bidiagonal death generator: all terms nonnegative,
  // unconditionally stable. The horizon is split into chunks with
  // lam * dt <= 50 so the Poisson weights stay in linear floating-point
  // range (one long pass at lam * t ~ 10^3 drifts by ~1e-9 through the log
  // recursion; short chunks keep every weight exact to machine precision),
  // and each chunk is renormalized so roundoff cannot pile up across chunks.
  const double lam = rate_of(k);
  std::vector<double> v(p.size()), next(p.size()), acc(p.size());
  double remaining = t;
  while (remaining > 0.0) {
    const double dt = std::min(remaining, 50.0 / lam);
    remaining -= dt;
    const double lt = lam * dt;
    const std::size_t cap = static_cast<std::size_t>(lt + 12.0 * std::sqrt(lt + 1.0) + 60.0);

    v = p;
    std::fill(acc.begin(), acc.end(), 0.0);
    double w = std::exp(-lt);
    double cum = 0.0;
    for (std::size_t m = 0;; ++m) {
      if (m > 0) {
        for (int j = 1; j <= k; ++j) {
          double r = rate_of(j);
          next[j - 1] = v[j - 1] * (1.0 - r / lam);
          if (j + 1 <= k) next[j - 1] += v[j] * rate_of(j + 1) / lam;
        }
        v.swap(next);
        w *= lt / static_cast<double>(m);
      }
      for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w * v[i];
      cum += w;
      if (1.0 - cum <= 1e-15) break;
      if (m >= cap) {
        // The Poisson mass beyond lt + 12 sqrt(lt) is < e^{-60}; whatever is
        // missing from cum here is summation roundoff, not tail.
        require(cum >= 1.0 - 1e-11, "ConvergenceFailure",
                "death-chain uniformization did not converge");
        break;
      }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) p[i] = acc[i] / cum;
  }
  return p;
}

int death_chain_sample(int k, double t, Rng& rng) {
  require(k >= 1, "BadParam", "need k >= 1");
  require(t >= 0.0, "BadParam", "time must be >= 0");
  int j = k;
  double clock = 0.0;
  while (j >= 2) {
    clock += rng.exponential(rate_of(j));
    if (clock > t) break;
    --j;
  }
  return j;
}

double mixture_cdf(double delta, double t) {
  require(delta >= 0.0 && delta < 1.0, "BadParam", "atom mass must lie in [0,1)");
  if (t < 0.0) return 0.0;
  return delta + (1.0 - delta) * (1.0 - std::exp(-t));
}

WfTrajectory wf_simulate(double u, double t_final, double dt, Rng& rng) {
  require(u >= 0.0 && u <= 1.0, "BadParam", "initial value must lie in [0,1]");
  require(t_final > 0.0, "BadParam", "horizon must be positive");
  require(dt > 0.0 && dt <= 1e-3 * t_final, "BadParam", "need dt <= 1e-3 * T");

  WfTrajectory traj;
  double y = u;
  double t = 0.0;
  traj.times.push_back(0.0);
  traj.values.push_back(y);
  bool absorbed = (y <= 0.0 || y >= 1.0);
  while (t < t_final) {
    double h = std::min(dt, t_final - t);
    if (!absorbed) {
      double var = y * (1.0 - y);
      if (var > 0.0) y += std::sqrt(var * h) * rng.normal();
      if (y <= 1e-12) {
        y = 0.0;
        absorbed = true;
      } else if (y >= 1.0 - 1e-12) {
        y = 1.0;
        absorbed = true;
      }
    }
    t += h;
    traj.times.push_back(t);
    traj.values.push_back(y);
  }
  traj.absorbed = absorbed;
  traj.final_value = y;
  return traj;
}

}  // namespace vm
