#include "voter/stats.hpp"

#include <algorithm>
#include <cmath>

namespace vm {

Ecdf::Ecdf(std::vector<double> sample) : sorted_(std::move(sample)) {
  require(!sorted_.empty(), "TooFewSamples", "empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double t) const {
  auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_critical(double alpha) {
  if (alpha == 0.01) return 1.628;
  if (alpha == 0.05) return 1.358;
  fail("BadParam", "only alpha = 0.01 and 0.05 thresholds are tabulated");
}

KsResult ks_one_sample(std::vector<double> sample,
                       const std::function<double(double)>& cdf, double alpha) {
  require(sample.size() >= 10, "TooFewSamples", "one-sample KS needs N >= 10");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    d = std::max(d, f - static_cast<double>(i) / n);        // approach from the left
    d = std::max(d, static_cast<double>(i + 1) / n - f);    // and from the right
  }
  KsResult r;
  r.d = d;
  r.threshold = ks_critical(alpha) / std::sqrt(n);
  r.pass = d <= r.threshold;
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha) {
  require(a.size() >= 10 && b.size() >= 10, "TooFewSamples", "two-sample KS needs N >= 10");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;  // consume ties on both sides
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.d = d;
  r.threshold = ks_critical(alpha) * std::sqrt((na + nb) / (na * nb));
  r.pass = d <= r.threshold;
  return r;
}

Interval bootstrap_mean_ci(const std::vector<double>& sample, double level, int resamples,
                           Rng& rng) {
  require(sample.size() >= 30, "TooFewSamples", "bootstrap needs N >= 30");
  require(level > 0.0 && level < 1.0, "BadParam", "confidence level must be in (0,1)");
  require(resamples >= 10, "BadParam", "need at least 10 resamples");
  std::vector<double> means(static_cast<std::size_t>(resamples));
  const std::size_t n = sample.size();
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += sample[rng.below(n)];
    means[r] = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double p) {
    double idx = p * static_cast<double>(resamples - 1);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, means.size() - 1);
    double w = idx - static_cast<double>(lo);
    return (1.0 - w) * means[lo] + w * means[hi];
  };
  double tail = (1.0 - level) / 2.0;
  return {quantile(tail), quantile(1.0 - tail)};
}

MeanSe mean_se(const std::vector<double>& sample) {
  MeanSe m;
  m.n = sample.size();
  if (m.n == 0) return m;
  double s = 0.0;
  for (double x : sample) s += x;
  m.mean = s / static_cast<double>(m.n);
  double ss = 0.0;
  for (double x : sample) ss += (x - m.mean) * (x - m.mean);
  if (m.n > 1) {
    m.sd = std::sqrt(ss / static_cast<double>(m.n - 1));
    m.se = m.sd / std::sqrt(static_cast<double>(m.n));
  }
  return m;
}

}  // namespace vm
