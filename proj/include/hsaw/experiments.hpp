#pragma once

// Experiment drivers: displacement/speed estimation, ballisticity scans,
// (n, eps) scaling sweeps with exponent fits, the curvature-rescaling identity
// and per-walk statistics behind the area argument.
//
// Seeding: replica k of an i.i.d. experiment uses Rng(derive_seed(seed, k));
// a Markov chain uses Rng(derive_seed(seed, 0)); row n of a scan or sweep uses
// seed derive_seed(base_seed, n). Results never depend on the worker count.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hsaw/dimension.hpp"
#include "hsaw/error.hpp"
#include "hsaw/geometry_analysis.hpp"
#include "hsaw/hyperbolic.hpp"
#include "hsaw/parallel.hpp"
#include "hsaw/rng.hpp"
#include "hsaw/samplers.hpp"
#include "hsaw/statistics.hpp"
#include "hsaw/walk.hpp"

namespace hsaw {

inline constexpr std::int64_t min_speed_samples = 10;

/// Shortest round-trip decimal form used in every CSV.
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct DisplacementSample {
  std::vector<double> values;  // d(x_0, x_n) per sample, in sample order
  EstimateMethod method = EstimateMethod::iid;
  std::int64_t attempts = 0;   // rejection: total proposals over all samples
  std::optional<ChainStats> chain;
};

/// Draws `n_samples` displacements d(x_0, x_n) with the configured sampler.
template <int D>
DisplacementSample sample_displacements(const SawParams& params, std::int64_t n_samples,
                                        unsigned jobs = 1) {
  params.validate();
  if (params.d != D) throw UsageError("sample_displacements: dimension mismatch");
  if (n_samples < 1) throw UsageError("sample_displacements: n_samples must be >= 1");
  DisplacementSample out;
  out.values.assign(static_cast<std::size_t>(n_samples), 0.0);
  if (params.sampler == SamplerKind::rejection) {
    std::vector<std::int64_t> attempts(out.values.size(), 0);
    parallel_for(out.values.size(), jobs, [&](std::size_t k) {
      Rng rng(derive_seed(params.seed, k));
      auto r = rejection_sample<D>(params, rng);
      out.values[k] = end_to_end_distance(r.walk);
      attempts[k] = r.attempts;
    });
    for (auto a : attempts) out.attempts += a;
    out.method = EstimateMethod::iid;
  } else {
    Chain<D> chain(params, Rng(derive_seed(params.seed, 0)));
    for (auto& v : out.values) v = end_to_end_distance(chain.next());
    out.chain = chain.stats();
    out.method = EstimateMethod::batch_means;
  }
  return out;
}

/// i.i.d. or batch-means report for `values` according to `method`.
inline EstimateReport estimate_mean(std::span<const double> values, EstimateMethod method) {
  return method == EstimateMethod::iid ? iid_estimate(values) : batch_means_estimate(values);
}

/// Report on the per-step speed d(x_0, x_n) / n of the given displacements.
inline EstimateReport speed_report(const DisplacementSample& s, int n) {
  std::vector<double> speed(s.values.size());
  for (std::size_t k = 0; k < speed.size(); ++k) speed[k] = s.values[k] / static_cast<double>(n);
  return estimate_mean(speed, s.method);
}

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace detail

/// Estimate of E_n[d(x_0, x_n)] / n.
inline EstimateReport speed_estimate(const SawParams& params, std::int64_t n_samples, unsigned jobs = 1) {
  if (n_samples < min_speed_samples) throw UsageError("speed_estimate: n_samples must be >= 10");
  const auto t0 = std::chrono::steady_clock::now();
  auto r = with_dimension(params.d, [&](auto dim) {
    return speed_report(sample_displacements<decltype(dim)::value>(params, n_samples, jobs), params.n);
  });
  r.runtime_seconds = detail::seconds_since(t0);
  return r;
}

// ---------------------------------------------------------------------------
// Ballisticity scan

struct ScanRow {
  int n;
  EstimateReport report;
};

inline void require_ascending(const std::vector<int>& n_values) {
  if (n_values.empty()) throw UsageError("n_values must be non-empty");
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    if (n_values[k] < 1) throw UsageError("n_values must be >= 1");
    if (k > 0 && n_values[k] <= n_values[k - 1]) throw UsageError("n_values must be strictly ascending");
  }
}

/// One speed estimate per n, with params.n = n and seed derive_seed(base seed, n).
inline std::vector<ScanRow> ballisticity_scan(const SawParams& base, const std::vector<int>& n_values,
                                              std::int64_t n_samples, unsigned jobs = 1) {
  require_ascending(n_values);
  std::vector<ScanRow> rows;
  for (int n : n_values) {
    SawParams p = base;
    p.n = n;
    p.seed = derive_seed(base.seed, static_cast<std::uint64_t>(n));
    rows.push_back({n, speed_estimate(p, n_samples, jobs)});
  }
  return rows;
}

inline const char* scan_csv_header = "n,estimate,std_error,ci_low,ci_high,method,samples";

inline std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::ostringstream os;
  os << scan_csv_header << '\n';
  for (const auto& r : rows) {
    os << r.n << ',' << format_real(r.report.estimate) << ',' << format_real(r.report.std_error) << ','
       << format_real(r.report.ci_low) << ',' << format_real(r.report.ci_high) << ','
       << to_string(r.report.method) << ',' << r.report.n_samples << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// (n, eps) scaling

struct EpsRule {
  enum class Kind { constant, inverse, power };
  Kind kind = Kind::constant;
  double value = 1.0;  // eps for constant, beta_0 for power; unused for inverse

  static EpsRule constant(double eps) { return {Kind::constant, eps}; }
  static EpsRule inverse() { return {Kind::inverse, 1.0}; }
  static EpsRule power(double beta0) { return {Kind::power, beta0}; }

  double eps(int n) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::inverse: return 1.0 / static_cast<double>(n);
      case Kind::power: return std::pow(static_cast<double>(n), -value);
    }
    return value;
  }

  void validate() const {
    if (kind == Kind::constant && !(value > 0.0 && std::isfinite(value))) {
      throw ConfigError("eps_rule const: eps must be > 0");
    }
    if (kind == Kind::power && !std::isfinite(value)) throw ConfigError("eps_rule power: beta0 must be finite");
  }
};

inline std::string to_string(EpsRule::Kind k) {
  switch (k) {
    case EpsRule::Kind::constant: return "const";
    case EpsRule::Kind::inverse: return "inverse";
    case EpsRule::Kind::power: return "power";
  }
  return "const";
}

struct ScalingPoint {
  int n;
  double eps;
  double mean_displacement;  // unscaled d(x_0, x_n)
  EstimateReport report;     // of d(x_0, x_n)
  EstimateReport speed;      // of d(x_0, x_n) / n, as in the ballisticity scan
};

/// For each n runs the sampler with step eps_rule(n) and avoidance radius
/// c * eps_rule(n), seeded exactly as `ballisticity_scan`.
inline std::vector<ScalingPoint> scaling_sweep(const SawParams& base, const std::vector<int>& n_values,
                                               const EpsRule& rule, std::int64_t n_samples,
                                               unsigned jobs = 1) {
  require_ascending(n_values);
  rule.validate();
  if (n_samples < min_speed_samples) throw UsageError("scaling_sweep: n_samples must be >= 10");
  std::vector<ScalingPoint> out;
  for (int n : n_values) {
    SawParams p = base;
    p.n = n;
    p.eps = rule.eps(n);
    p.seed = derive_seed(base.seed, static_cast<std::uint64_t>(n));
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = with_dimension(p.d, [&](auto dim) {
      return sample_displacements<decltype(dim)::value>(p, n_samples, jobs);
    });
    ScalingPoint pt{n, p.eps, 0.0, estimate_mean(s.values, s.method), speed_report(s, n)};
    pt.mean_displacement = pt.report.estimate;
    pt.report.runtime_seconds = pt.speed.runtime_seconds = detail::seconds_since(t0);
    out.push_back(pt);
  }
  return out;
}

inline const char* scaling_csv_header =
    "n,eps,mean_displacement,std_error,ci_low,ci_high,scaled_displacement,speed,method,samples";

inline std::string scaling_csv(const std::vector<ScalingPoint>& points) {
  std::ostringstream os;
  os << scaling_csv_header << '\n';
  for (const auto& p : points) {
    os << p.n << ',' << format_real(p.eps) << ',' << format_real(p.mean_displacement) << ','
       << format_real(p.report.std_error) << ',' << format_real(p.report.ci_low) << ','
       << format_real(p.report.ci_high) << ',' << format_real(p.mean_displacement / p.eps) << ','
       << format_real(p.speed.estimate) << ',' << to_string(p.report.method) << ','
       << p.report.n_samples << '\n';
  }
  return os.str();
}

/// raw: fit log d(x_0, x_n); rescaled: fit log d_eps(x_0, x_n) = log(d / eps).
enum class Normalization { raw, rescaled };

inline std::string to_string(Normalization n) { return n == Normalization::raw ? "raw" : "rescaled"; }

struct BetaFit {
  double beta;
  double intercept;
  double r_squared;
  Normalization normalization;
};

namespace detail {
inline std::vector<double> fit_response(const std::vector<ScalingPoint>& points, Normalization norm) {
  std::vector<double> y;
  for (const auto& p : points) {
    const double v = norm == Normalization::raw ? p.mean_displacement : p.mean_displacement / p.eps;
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("beta_fit: non-positive displacement");
    y.push_back(std::log(v));
  }
  return y;
}

inline void require_distinct_n(const std::vector<ScalingPoint>& points, std::size_t minimum) {
  if (points.size() < minimum) {
    throw UsageError("beta_fit: need >= " + std::to_string(minimum) + " points");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i].n == points[j].n) throw UsageError("beta_fit: n values must be distinct");
    }
  }
}
}  // namespace detail

/// OLS slope of log(displacement) against log(n).
inline BetaFit beta_fit(const std::vector<ScalingPoint>& points, Normalization norm = Normalization::raw) {
  detail::require_distinct_n(points, 3);
  const auto y = detail::fit_response(points, norm);
  std::vector<double> x;
  for (const auto& p : points) x.push_back(std::log(static_cast<double>(p.n)));
  const auto f = ols(x, y);
  return {f.slope, f.intercept, f.r_squared, norm};
}

/// Fit log(displacement) = a + beta log n + gamma log log n, reported next to
/// the plain power-law fit when the exponent may carry logarithmic factors.
struct LogCorrectedFit {
  double beta;
  double gamma;
  double intercept;
  double r_squared;
  Normalization normalization;
};

inline LogCorrectedFit log_corrected_fit(const std::vector<ScalingPoint>& points,
                                         Normalization norm = Normalization::raw) {
  detail::require_distinct_n(points, 4);
  const auto y = detail::fit_response(points, norm);
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd b(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const int n = points[static_cast<std::size_t>(k)].n;
    if (n < 2) throw UsageError("log_corrected_fit: n must be >= 2");
    const double ln = std::log(static_cast<double>(n));
    a(k, 0) = 1.0;
    a(k, 1) = ln;
    a(k, 2) = std::log(ln);
    b(k) = y[static_cast<std::size_t>(k)];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (a * coef - b).squaredNorm();
  return {coef(1), coef(2), coef(0), ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0, norm};
}

// ---------------------------------------------------------------------------
// Curvature rescaling

/// Develops unit-length steps on the hyperboloid <x, x> = -R^2 (curvature
/// -1/R^2) with frame-relative directions, using the explicit geodesic and
/// parallel-transport formulas of that space. Returns the vertices.
template <int D>
std::vector<Ambient<D>> develop_scaled(const std::vector<Spatial<D>>& directions, double radius) {
  if (!(radius > 0.0)) throw UsageError("develop_scaled: radius must be > 0");
  const double a = 1.0 / radius;  // angle subtended by a unit step
  const double ch = std::cosh(a);
  const double chm1 = 2.0 * std::sinh(0.5 * a) * std::sinh(0.5 * a);
  const double sh = std::sinh(a);
  Ambient<D> p = Ambient<D>::Zero();
  p[0] = radius;
  LorentzMatrix<D> frame = LorentzMatrix<D>::Identity();  // columns 1..D: frame at p
  std::vector<Ambient<D>> out{p};
  for (const auto& u : directions) {
    const Ambient<D> v = frame.template rightCols<D>() * u;  // unit tangent at p
    for (int k = 1; k <= D; ++k) {
      const Ambient<D> e = frame.col(k);
      const double along = mink_inner<D>(e, v);
      frame.col(k) = e + along * (chm1 * v + sh * p / radius);
    }
    p = ch * p + radius * sh * v;
    out.push_back(p);
  }
  return out;
}

/// Distance on the hyperboloid of radius R.
template <int D>
double scaled_distance(const Ambient<D>& p, const Ambient<D>& q, double radius) {
  const double r2 = radius * radius;
  const double m = -mink_inner<D>(p, q) / r2;
  if (m > 2.0) return radius * std::acosh(m);
  const Ambient<D> diff = p - q;
  const double chord2 = std::max(0.0, mink_inner<D>(diff, diff));
  return 2.0 * radius * std::asinh(std::sqrt(chord2) / (2.0 * radius));
}

struct RescalingCheck {
  int n;
  double eps;
  double displacement;         // (n, eps)-walk on H^d
  double scaled_displacement;  // (n, 1)-walk on (1/eps) H^d, measured in its own metric
  double difference;           // |displacement - eps * scaled_displacement|
  bool pass;
};

inline constexpr double rescaling_tolerance = 1e-9;

/// Samples an (n, eps)-SAW from Rng(seed) and compares d(x_0, x_n) with eps
/// times the displacement of the same direction sequence developed with unit
/// steps on the hyperboloid of radius 1/eps.
template <int D>
RescalingCheck rescaling_identity_check(SawParams params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  const auto w = rejection_sample<D>(params, rng).walk;
  const double radius = 1.0 / params.eps;
  const auto pts = develop_scaled<D>(w.directions(), radius);
  RescalingCheck r{params.n, params.eps, end_to_end_distance(w),
                   scaled_distance<D>(pts.front(), pts.back(), radius), 0.0, false};
  r.difference = std::abs(r.displacement - params.eps * r.scaled_displacement);
  r.pass = r.difference <= rescaling_tolerance * std::max(1.0, r.displacement);
  return r;
}

// ---------------------------------------------------------------------------
// Per-walk statistics

struct BallPacking {
  std::int64_t near_count;
  double geodesic_length;
  double density;  // near_count / geodesic_length
};

/// Vertices within C of [x_0, x_n] against the length of that segment.
template <int D>
BallPacking ball_packing_statistic(const Walk<D>& w, double C) {
  const std::int64_t count = near_geodesic_count(w, C);
  const double len = end_to_end_distance(w);
  return {count, len, static_cast<double>(count) / len};
}

/// Per-sample values of `stat(walk)` over `n_samples` thinned states of one
/// Markov chain seeded as in `sample_displacements`.
template <int D, typename Stat>
std::vector<double> chain_statistic(SawParams params, std::int64_t n_samples, Stat&& stat) {
  params.sampler = SamplerKind::mcmc;
  params.validate();
  Chain<D> chain(params, Rng(derive_seed(params.seed, 0)));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (std::int64_t k = 0; k < n_samples; ++k) out.push_back(stat(chain.next()));
  return out;
}

}  // namespace hsaw
