#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hsaw/error.hpp"

namespace hsaw {

/// Welford running mean/variance. Exact (zero variance) on constant input.
class RunningStats {
 public:
  void push(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }
  std::int64_t count() const { return count_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance.
  double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }

 private:
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline RunningStats summarize(std::span<const double> xs) {
  RunningStats s;
  for (double x : xs) s.push(x);
  return s;
}

enum class EstimateMethod { iid, batch_means };

inline std::string to_string(EstimateMethod m) {
  return m == EstimateMethod::iid ? "iid" : "batch_means";
}

struct EstimateReport {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::int64_t n_samples = 0;
  EstimateMethod method = EstimateMethod::iid;
  double runtime_seconds = 0.0;
  /// Integrated autocorrelation time (batch-means based); 1 for i.i.d. input.
  double autocorrelation_time = 1.0;
};

inline constexpr double z95 = 1.959963984540054;

namespace detail {
inline EstimateReport finish_report(double mean, double se, std::int64_t n, EstimateMethod m) {
  EstimateReport r;
  r.estimate = mean;
  r.std_error = se;
  r.ci_low = mean - z95 * se;
  r.ci_high = mean + z95 * se;
  r.n_samples = n;
  r.method = m;
  return r;
}
}  // namespace detail

/// Mean with the i.i.d. standard error s / sqrt(N).
inline EstimateReport iid_estimate(std::span<const double> xs) {
  if (xs.empty()) throw UsageError("iid_estimate: no samples");
  const RunningStats s = summarize(xs);
  const double se = std::sqrt(s.variance() / static_cast<double>(xs.size()));
  return detail::finish_report(s.mean(), se, static_cast<std::int64_t>(xs.size()),
                               EstimateMethod::iid);
}

/// Number of batches used for N correlated samples: max(20, floor(sqrt N)),
/// never more than N.
inline std::size_t batch_count(std::size_t n) {
  const auto b = std::max<std::size_t>(20, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
  return std::min(b, n);
}

struct BatchMeans {
  std::vector<double> means;
  std::size_t batch_size = 0;
};

/// Splits xs into equal batches (dropping the remainder at the front so the
/// most recent samples are kept).
inline BatchMeans batch_means(std::span<const double> xs, std::size_t batches) {
  if (batches == 0 || xs.size() < batches) throw UsageError("batch_means: too few samples");
  BatchMeans bm;
  bm.batch_size = xs.size() / batches;
  const std::size_t skip = xs.size() - bm.batch_size * batches;
  for (std::size_t b = 0; b < batches; ++b) {
    RunningStats s;
    for (std::size_t k = 0; k < bm.batch_size; ++k) s.push(xs[skip + b * bm.batch_size + k]);
    bm.means.push_back(s.mean());
  }
  return bm;
}

/// Integrated autocorrelation time tau = m * Var(batch mean) / Var(x).
inline double integrated_autocorrelation(std::span<const double> xs) {
  if (xs.size() < 40) return 1.0;
  const double var = summarize(xs).variance();
  if (var <= 0.0) return 1.0;
  const auto bm = batch_means(xs, batch_count(xs.size()));
  const double bvar = summarize(bm.means).variance();
  return std::max(1.0, static_cast<double>(bm.batch_size) * bvar / var);
}

/// Mean with the batch-means standard error sd(batch means) / sqrt(B).
inline EstimateReport batch_means_estimate(std::span<const double> xs) {
  if (xs.empty()) throw UsageError("batch_means_estimate: no samples");
  const RunningStats all = summarize(xs);
  const auto bm = batch_means(xs, batch_count(xs.size()));
  const RunningStats bs = summarize(bm.means);
  const double se = std::sqrt(bs.variance() / static_cast<double>(bm.means.size()));
  auto r = detail::finish_report(all.mean(), se, static_cast<std::int64_t>(xs.size()),
                                 EstimateMethod::batch_means);
  r.autocorrelation_time = integrated_autocorrelation(xs);
  return r;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw UsageError("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

struct LinearFit {
  double slope;
  double intercept;
  double r_squared;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("ols: need >= 2 paired values");
  const RunningStats sx = summarize(x);
  const RunningStats sy = summarize(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - sx.mean();
    const double dy = y[k] - sy.mean();
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw UsageError("ols: x values are all equal");
  const double slope = sxy / sxx;
  const double intercept = sy.mean() - slope * sx.mean();
  double ss_res = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = y[k] - intercept - slope * x[k];
    ss_res += e * e;
  }
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return {slope, intercept, r2};
}

}  // namespace hsaw
