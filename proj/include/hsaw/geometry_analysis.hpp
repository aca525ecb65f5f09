#pragma once

// Numerical checks of the coarse geometry behind ballisticity: thin triangles,
// hyperbolic convex hulls (Klein model, D = 2), boundary density of hulls of
// self-avoiding point sets, the two-geodesics lemma, and near-geodesic counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "hsaw/error.hpp"
#include "hsaw/hyperbolic.hpp"
#include "hsaw/parallel.hpp"
#include "hsaw/rng.hpp"
#include "hsaw/walk.hpp"

namespace hsaw {

inline constexpr double default_delta = 0.89;
inline constexpr double default_grid_step = 1e-2;

/// Arc-length sample positions 0, step, 2 step, ..., and the endpoint.
inline std::vector<double> side_grid(double length, double step) {
  std::vector<double> s;
  const auto count = static_cast<std::size_t>(std::floor(length / step));
  s.reserve(count + 2);
  for (std::size_t k = 0; k <= count; ++k) s.push_back(static_cast<double>(k) * step);
  if (s.back() < length) s.push_back(length);
  return s;
}

// ---------------------------------------------------------------------------
// Thin triangles

/// Thinness of the triangle (a, b, c): the largest distance from a point of one
/// side to the union of the other two, with each side sampled on `side_grid`.
/// Evaluated directly on the hyperboloid; accurate for moderate radii.
template <int D>
double triangle_thinness(const HPoint<D>& a, const HPoint<D>& b, const HPoint<D>& c,
                         double step = default_grid_step) {
  const HPoint<D>* v[3] = {&a, &b, &c};
  double worst = 0.0;
  for (int side = 0; side < 3; ++side) {
    const HPoint<D>& p = *v[side];
    const HPoint<D>& q = *v[(side + 1) % 3];
    const HPoint<D>& r = *v[(side + 2) % 3];
    const double len = dist(p, q);
    if (len < tol::coincident) continue;
    const auto lg = log_map(p, q);
    for (double s : side_grid(len, step)) {
      const HPoint<D> x = s == 0.0 ? p : (s == len ? q : geodesic_at<D>(p, lg.direction.vec, s));
      const double to_rest = std::min(dist_to_geodesic_segment(x, q, r), dist_to_geodesic_segment(x, r, p));
      worst = std::max(worst, to_rest);
    }
  }
  return worst;
}

/// Side lengths of a triangle, a opposite vertex A and so on.
struct TriangleSides {
  double a;
  double b;
  double c;
};

namespace detail {

/// Distance from the point at distance s along one ray from a vertex V to the
/// segment of length len on the other ray, the rays meeting at angle theta.
inline double point_to_side(double s, double cos_t, double sin_t, double sin_half2, double len) {
  if (s <= 0.0) return 0.0;
  if (cos_t <= 0.0) return s;  // foot on the opposite ray: nearest point is V
  const double sh_s = std::sinh(s);
  const double h = std::asinh(sh_s * sin_t);
  const double tc = std::tanh(s) * cos_t;
  const double foot = tc < 0.9 ? std::atanh(tc) : std::acosh(std::max(1.0, std::cosh(s) / std::cosh(h)));
  if (foot <= len) return h;
  // Past the far endpoint W: sinh^2(d/2) = sinh^2((s-len)/2) + sinh s sinh len sin^2(theta/2).
  const double half = std::sinh(0.5 * (s - len));
  return 2.0 * std::asinh(std::sqrt(half * half + sh_s * std::sinh(len) * sin_half2));
}

struct Angle {
  double cos;
  double sin;
  double sin_half2;
};

/// Angle between sides x and y, opposite side z, by the half-angle formulas.
inline Angle angle_between(double x, double y, double z) {
  const double sigma = 0.5 * (x + y + z);
  const double denom = std::sinh(x) * std::sinh(y);
  const double s2 = std::max(0.0, std::sinh(std::max(0.0, sigma - x)) * std::sinh(std::max(0.0, sigma - y)) / denom);
  const double c2 = std::max(0.0, std::sinh(sigma) * std::sinh(std::max(0.0, sigma - z)) / denom);
  const double norm = s2 + c2;  // = 1 in exact arithmetic
  const double sh = std::sqrt(s2 / norm);
  const double ch = std::sqrt(c2 / norm);
  return Angle{ch * ch - sh * sh, 2.0 * sh * ch, sh * sh};
}

}  // namespace detail

/// Thinness of the triangle with the given side lengths, on the same grid as
/// `triangle_thinness`, by hyperbolic trigonometry. Stable for sides of any
/// length representable in double (cosh < 1e308).
inline double triangle_thinness_from_sides(const TriangleSides& t, double step = default_grid_step) {
  if (std::min({t.a, t.b, t.c}) < tol::coincident) return 0.0;
  // Vertices A, B, C; side a = BC, b = CA, c = AB.
  const auto angle_a = detail::angle_between(t.b, t.c, t.a);
  const auto angle_b = detail::angle_between(t.c, t.a, t.b);
  const auto angle_c = detail::angle_between(t.a, t.b, t.c);
  struct Side {
    double len;
    detail::Angle at_start;  // angle at the first endpoint
    double other_from_start;  // side length sharing the first endpoint
    detail::Angle at_end;
    double other_from_end;
  };
  // Side BC from B: shares B with AB (c), shares C with CA (b).
  const Side sides[3] = {
      {t.a, angle_b, t.c, angle_c, t.b},
      {t.b, angle_c, t.a, angle_a, t.c},  // CA from C
      {t.c, angle_a, t.b, angle_b, t.a},  // AB from A
  };
  double worst = 0.0;
  for (const Side& sd : sides) {
    for (double s : side_grid(sd.len, step)) {
      const double d1 = detail::point_to_side(s, sd.at_start.cos, sd.at_start.sin,
                                              sd.at_start.sin_half2, sd.other_from_start);
      const double d2 = detail::point_to_side(sd.len - s, sd.at_end.cos, sd.at_end.sin,
                                              sd.at_end.sin_half2, sd.other_from_end);
      worst = std::max(worst, std::min(d1, d2));
    }
  }
  return worst;
}

/// A point of H^D in polar form about the origin.
template <int D>
struct PolarPoint {
  double radius;
  Spatial<D> direction;
};

/// Distance between polar points, stable at every radius.
template <int D>
double polar_distance(const PolarPoint<D>& p, const PolarPoint<D>& q) {
  const double half_angle_sin = 0.5 * (p.direction - q.direction).norm();
  const double dr = std::sinh(0.5 * (p.radius - q.radius));
  return 2.0 * std::asinh(std::sqrt(dr * dr + std::sinh(p.radius) * std::sinh(q.radius) *
                                                  half_angle_sin * half_angle_sin));
}

/// Radius with density proportional to sinh^{D-1}(r) on [0, cap] (uniform in
/// hyperbolic volume), by bisection on the closed-form CDF.
template <int D>
double sample_volume_radius(double cap, Rng& rng) {
  auto cdf = [](double r) {
    // I_k(r) = int_0^r sinh^k = sinh^{k-1} r cosh r / k - (k-1)/k I_{k-2}(r)
    double even = r;                  // I_0
    double odd = std::cosh(r) - 1.0;  // I_1
    double ik = (D - 1) % 2 == 0 ? even : odd;
    for (int k = (D - 1) % 2 == 0 ? 2 : 3; k <= D - 1; k += 2) {
      ik = std::pow(std::sinh(r), k - 1) * std::cosh(r) / k - (k - 1.0) / k * ik;
    }
    return ik;
  };
  const double target = rng.uniform() * cdf(cap);
  double lo = 0.0;
  double hi = cap;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct DeltaEstimate {
  double delta;         // max_observed rounded up at the third decimal
  std::int64_t samples;
  double max_observed;
};

/// Samples `samples` triangles with vertices i.i.d. uniform in the ball of
/// radius `radius_cap` and returns the largest thinness seen. Triangle k uses
/// its own substream of one base seed drawn from `rng`, so raising `samples`
/// only appends triangles and max_observed is non-decreasing in `samples`.
template <int D>
DeltaEstimate estimate_delta(std::int64_t samples, double radius_cap, Rng& rng,
                             unsigned jobs = 1, double step = default_grid_step) {
  if (samples < 1) throw UsageError("estimate_delta: samples must be >= 1");
  if (!(radius_cap > 0.0) || radius_cap > tol::max_distance / 2) {
    throw UsageError("estimate_delta: radius_cap out of range");
  }
  const std::uint64_t base = rng();
  std::vector<double> per(static_cast<std::size_t>(samples), 0.0);
  parallel_for(per.size(), jobs, [&](std::size_t k) {
    Rng local(derive_seed(base, k));
    for (;;) {
      PolarPoint<D> v[3];
      for (auto& p : v) {
        p.radius = sample_volume_radius<D>(radius_cap, local);
        p.direction = random_unit_direction<D>(local);
      }
      const TriangleSides t{polar_distance(v[1], v[2]), polar_distance(v[2], v[0]),
                            polar_distance(v[0], v[1])};
      if (std::min({t.a, t.b, t.c}) < 1e-9) continue;  // degenerate: resample
      per[k] = triangle_thinness_from_sides(t, step);
      return;
    }
  });
  const double max_observed = *std::max_element(per.begin(), per.end());
  double delta = std::ceil(max_observed * 1000.0) / 1000.0;
  if (delta < max_observed) delta += 1e-3;
  return DeltaEstimate{delta, samples, max_observed};
}

// ---------------------------------------------------------------------------
// Convex hulls (D = 2)

struct HullResult {
  /// Input indices of the hull vertices, counter-clockwise in Klein
  /// coordinates. One or two entries for degenerate (point / collinear) input.
  std::vector<int> boundary_indices;
  std::vector<HPoint<2>> boundary_vertices;
  /// Hyperbolic distance from each input point to the hull boundary.
  std::vector<double> per_point_boundary_distance;
  bool degenerate = false;
};

inline constexpr double hull_collinearity_tol = 1e-12;

namespace detail {

inline double cross2(const Spatial<2>& o, const Spatial<2>& a, const Spatial<2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

/// Index of the point minimizing the largest distance to the others.
inline int minimax_center(const std::vector<HPoint<2>>& pts) {
  if (pts.size() > 400) return static_cast<int>(pts.size() / 2);
  int best = 0;
  double best_r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) r = std::max(r, dist(pts[i], pts[j]));
    if (r < best_r) {
      best_r = r;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace detail

/// Hyperbolic convex hull of points of H^2: Euclidean hull (monotone chain) of
/// the Klein images after moving a central input point to the origin, with
/// per-point distances to the boundary geodesic polygon.
inline HullResult convex_hull(const std::vector<HPoint<2>>& points) {
  if (points.empty()) throw UsageError("convex_hull: empty input");
  const int m = static_cast<int>(points.size());
  const HPoint<2>& center = points[static_cast<std::size_t>(detail::minimax_center(points))];
  std::vector<HPoint<2>> local;
  std::vector<Spatial<2>> klein;
  local.reserve(points.size());
  for (const auto& p : points) {
    local.push_back(HPoint<2>::renormalized(detail::to_local_frame(center, p)));
    klein.push_back(klein_project(local.back()).coords);
  }

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const auto& a = klein[static_cast<std::size_t>(i)];
    const auto& b = klein[static_cast<std::size_t>(j)];
    return a[0] < b[0] || (a[0] == b[0] && (a[1] < b[1] || (a[1] == b[1] && i < j)));
  });
  order.erase(std::unique(order.begin(), order.end(),
                          [&](int i, int j) {
                            return klein[static_cast<std::size_t>(i)] == klein[static_cast<std::size_t>(j)];
                          }),
              order.end());

  HullResult out;
  out.per_point_boundary_distance.assign(points.size(), 0.0);
  if (order.size() <= 2) {
    out.degenerate = true;
    out.boundary_indices.push_back(order.front());
    if (order.size() == 2) out.boundary_indices.push_back(order.back());
  } else {
    auto kp = [&](int i) -> const Spatial<2>& { return klein[static_cast<std::size_t>(i)]; };
    std::vector<int> hull(2 * order.size());
    std::size_t h = 0;
    for (int idx : order) {
      while (h >= 2 && detail::cross2(kp(hull[h - 2]), kp(hull[h - 1]), kp(idx)) <= hull_collinearity_tol) --h;
      hull[h++] = idx;
    }
    const std::size_t lower = h + 1;
    for (auto it = order.rbegin() + 1; it != order.rend(); ++it) {
      while (h >= lower && detail::cross2(kp(hull[h - 2]), kp(hull[h - 1]), kp(*it)) <= hull_collinearity_tol) --h;
      hull[h++] = *it;
    }
    hull.resize(h - 1);
    if (hull.size() <= 2) {
      // All points collinear within tolerance: boundary is the extreme segment.
      out.degenerate = true;
      out.boundary_indices = {order.front(), order.back()};
    } else {
      out.boundary_indices = hull;
    }
  }
  for (int i : out.boundary_indices) out.boundary_vertices.push_back(points[static_cast<std::size_t>(i)]);
  if (out.degenerate) return out;  // every point lies on the degenerate boundary

  const auto& b = out.boundary_indices;
  std::vector<bool> on_boundary(points.size(), false);
  for (int i : b) on_boundary[static_cast<std::size_t>(i)] = true;
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (on_boundary[p]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < b.size(); ++e) {
      const auto& u = local[static_cast<std::size_t>(b[e])];
      const auto& v = local[static_cast<std::size_t>(b[(e + 1) % b.size()])];
      best = std::min(best, dist_to_geodesic_segment(local[p], u, v));
    }
    out.per_point_boundary_distance[p] = best;
  }
  return out;
}

struct SurfaceDensity {
  double fraction;
  double threshold;
};

/// Fraction of the n + 1 vertices within (1 - c)/2 * eps of the boundary of
/// the walk's convex hull.
inline SurfaceDensity surface_density(const Walk<2>& w) {
  const double threshold = 0.5 * (1.0 - w.params().c) * w.params().eps;
  if (w.steps() + 1 <= 3) return {1.0, threshold};
  const auto hull = convex_hull(recentered_points(w, w.steps() / 2));
  const auto near = std::count_if(hull.per_point_boundary_distance.begin(),
                                  hull.per_point_boundary_distance.end(),
                                  [&](double x) { return x <= threshold; });
  return {static_cast<double>(near) / static_cast<double>(w.steps() + 1), threshold};
}

// ---------------------------------------------------------------------------
// Two geodesics

struct TwoGeodesicsReport {
  std::int64_t trials = 0;
  double separation = 0.0;
  double max_observed = 0.0;
  double threshold = 0.0;  // 2 delta
  std::int64_t violations = 0;
  double discretization_bound = 0.0;
  bool pass = false;
};

/// Distance between the geodesic segments [x, y] and [p, q], with [x, y]
/// sampled every `step` of arc length.
template <int D>
double segment_to_segment_distance(const HPoint<D>& x, const HPoint<D>& y, const HPoint<D>& p,
                                   const HPoint<D>& q, double step = default_grid_step) {
  const double len = dist(x, y);
  if (len < tol::coincident) return dist_to_geodesic_segment(x, p, q);
  const double sl = std::sinh(len);
  const bool long_side = len > 1.0;
  const auto lg = long_side ? LogResult<D>{TangentVector<D>{x, Ambient<D>::Zero()}, len} : log_map(x, y);
  double best = std::numeric_limits<double>::infinity();
  for (double s : side_grid(len, step)) {
    HPoint<D> g = x;
    if (s == len) {
      g = y;
    } else if (s > 0.0) {
      g = long_side ? HPoint<D>::renormalized(std::sinh(len - s) / sl * x.coords() + std::sinh(s) / sl * y.coords())
                    : geodesic_at<D>(x, lg.direction.vec, s);
    }
    best = std::min(best, dist_to_geodesic_segment(g, p, q));
  }
  return best;
}

/// Checks d([x, y], [x_0, y_0]) < 2 delta for geodesics A, B at distance
/// `separation` > 3 delta, realized at x_0 = o and y_0 = exp(o, e_1, separation),
/// with x in A and y in B at arc-length parameters uniform in [-half_length,
/// half_length].
template <int D>
TwoGeodesicsReport verify_two_geodesics(double delta, std::int64_t trials, Rng& rng,
                                        double separation = 3.0, double half_length = 50.0,
                                        unsigned jobs = 1, double step = default_grid_step) {
  if (!(delta > 0.0)) throw UsageError("verify_two_geodesics: delta must be > 0");
  if (!(separation > 3.0 * delta)) {
    throw UsageError("verify_two_geodesics: separation must exceed 3 delta");
  }
  if (trials < 1) throw UsageError("verify_two_geodesics: trials must be >= 1");
  const HPoint<D> x0 = HPoint<D>::origin();
  Spatial<D> e1 = Spatial<D>::Zero();
  e1[0] = 1.0;
  const HPoint<D> y0 = HPoint<D>::from_polar(separation, e1);
  const std::uint64_t base = rng();
  std::vector<double> per(static_cast<std::size_t>(trials), 0.0);
  parallel_for(per.size(), jobs, [&](std::size_t k) {
    Rng local(derive_seed(base, k));
    // Directions orthogonal to e_1: tangent at o and, unchanged by the boost
    // along e_1, tangent at y_0 orthogonal to the connecting geodesic.
    auto orthogonal_dir = [&]() {
      Ambient<D> v = Ambient<D>::Zero();
      const Spatial<D - 1> w = random_unit_direction<D - 1>(local);
      v.template tail<D - 1>() = w;
      return v;
    };
    const Ambient<D> a_dir = orthogonal_dir();
    const Ambient<D> b_dir = orthogonal_dir();
    const HPoint<D> x = geodesic_at<D>(x0, a_dir, local.uniform(-half_length, half_length));
    const HPoint<D> y = geodesic_at<D>(y0, b_dir, local.uniform(-half_length, half_length));
    per[k] = segment_to_segment_distance(x, y, x0, y0, step);
  });
  TwoGeodesicsReport r;
  r.trials = trials;
  r.separation = separation;
  r.threshold = 2.0 * delta;
  r.discretization_bound = 0.5 * step;
  for (double v : per) {
    r.max_observed = std::max(r.max_observed, v);
    if (!(v < r.threshold)) ++r.violations;
  }
  r.pass = r.violations == 0;
  return r;
}

// ---------------------------------------------------------------------------
// Near-geodesic vertices

/// Slack on the membership test d(x_i, [x_0, x_n]) <= C, so that vertices
/// lying on the segment count at C = 0 despite rounding.
inline constexpr double near_geodesic_tol = 1e-9;

/// Number of vertices x_i within distance C of the geodesic segment [x_0, x_n].
template <int D>
std::int64_t near_geodesic_count(const Walk<D>& w, double C) {
  if (!(C >= 0.0)) throw UsageError("near_geodesic_count: C must be >= 0");
  const int n = w.steps();
  if (end_to_end_distance(w) < tol::coincident) {
    throw DegenerateInputError("near_geodesic_count: x_0 = x_n");
  }
  std::int64_t near = 0;
  for (int i = 0; i <= n; ++i) {
    double d = 0.0;
    if (i != 0 && i != n) {
      d = detail::origin_to_geodesic<D>(relative_position(w, i, 0).coords(),
                                        relative_position(w, i, n).coords(), true);
    }
    if (d <= C + near_geodesic_tol) ++near;
  }
  return near;
}

/// Fraction of vertices x_i within distance C of the geodesic segment [x_0, x_n].
template <int D>
double near_geodesic_fraction(const Walk<D>& w, double C) {
  return static_cast<double>(near_geodesic_count(w, C)) / static_cast<double>(w.steps() + 1);
}

}  // namespace hsaw
