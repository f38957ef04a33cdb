#pragma once

// Order-statistics utilities behind the acceptance tests: empirical CDFs,
// one- and two-sample Kolmogorov-Smirnov distances with the usual asymptotic
// thresholds, percentile bootstrap intervals, and mean/SE summaries.

#include <functional>
#include <vector>

#include "voter/rng.hpp"

namespace vm {

class Ecdf {
public:
  explicit Ecdf(std::vector<double> sample);

  // Right-continuous step function: fraction of the sample <= t.
  double operator()(double t) const;

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

private:
  std::vector<double> sorted_;
};

struct KsResult {
  double d = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Asymptotic critical constants: c(0.01) = 1.628, c(0.05) = 1.358.
double ks_critical(double alpha);

// D = sup_t |ecdf(t) - cdf(t)|, evaluated from both sides of each sample
// point; threshold c(alpha)/sqrt(N).
KsResult ks_one_sample(std::vector<double> sample,
                       const std::function<double(double)>& cdf, double alpha = 0.01);

// Two-sample D with threshold c(alpha) * sqrt((n+m)/(n m)).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha = 0.01);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap for the mean; deterministic given the stream.
Interval bootstrap_mean_ci(const std::vector<double>& sample, double level, int resamples,
                           Rng& rng);

struct MeanSe {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

MeanSe mean_se(const std::vector<double>& sample);

}  // namespace vm
