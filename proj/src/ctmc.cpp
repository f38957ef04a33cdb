#include "voter/ctmc.hpp"

#include <algorithm>
#include <cmath>

namespace vm {

void SparseGen::finish() {
  out_rate.assign(static_cast<std::size_t>(n), 0.0);
  for (int x = 0; x < n; ++x)
    for (std::size_t e = row_ptr[x]; e < row_ptr[x + 1]; ++e) out_rate[x] += rate[e];
  max_rate = 0.0;
  for (double r : out_rate) max_rate = std::max(max_rate, r);
}

SparseGen generator_of(const Kernel& k) {
  SparseGen g;
  g.n = k.n;
  g.row_ptr = k.row_ptr;
  g.col = k.col;
  g.rate = k.rate;
  g.finish();
  return g;
}

void evolve_distribution(const SparseGen& g, std::vector<double>& dist, double t, double eps) {
  require(t >= 0.0 && std::isfinite(t), "BadParam", "evolution time must be finite and >= 0");
  require(dist.size() == static_cast<std::size_t>(g.n), "BadParam",
          "distribution size does not match generator");
  if (t == 0.0 || g.max_rate == 0.0) return;

  const double lt = g.max_rate * t;
  const double log_lt = std::log(lt);
  // Poisson mass concentrates within O(sqrt(lt)) of lt; the cap is generous.
  const std::size_t k_cap = static_cast<std::size_t>(lt + 12.0 * std::sqrt(lt + 1.0) + 60.0);

  std::vector<double> v = dist;
  std::vector<double> next(v.size());
  std::vector<double> acc(v.size(), 0.0);

  double log_w = -lt;  // log Poisson(k=0)
  double cum = 0.0;
  for (std::size_t k = 0;; ++k) {
    if (k > 0) {
      // one step of v <- v P with P = I + Q/L
      for (int y = 0; y < g.n; ++y)
        next[y] = v[y] * (1.0 - g.out_rate[y] / g.max_rate);
      for (int x = 0; x < g.n; ++x) {
        double vx = v[x];
        if (vx == 0.0) continue;
        vx /= g.max_rate;
        for (std::size_t e = g.row_ptr[x]; e < g.row_ptr[x + 1]; ++e)
          next[g.col[e]] += vx * g.rate[e];
      }
      v.swap(next);
      log_w += log_lt - std::log(static_cast<double>(k));
    }
    double w = (log_w > -745.0) ? std::exp(log_w) : 0.0;
    if (w > 0.0) {
      for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w * v[i];
      cum += w;
    }
    if (1.0 - cum <= eps) break;
    require(k < k_cap, "ConvergenceFailure", "uniformization series did not converge");
  }
  dist.swap(acc);
}

void evolve_on_grid(const SparseGen& g, std::vector<double> dist,
                    const std::vector<double>& times,
                    const std::function<void(std::size_t, const std::vector<double>&)>& visit,
                    double eps) {
  double now = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(times[i] >= now, "BadParam", "grid times must be ascending and >= 0");
    evolve_distribution(g, dist, times[i] - now, eps);
    now = times[i];
    visit(i, dist);
  }
}

}  // namespace vm
