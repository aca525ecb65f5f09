#pragma once

// Hyperboloid-model primitives for H^D.
//
// Points live on the upper sheet {x : <x,x> = -1, x_0 > 0} of Minkowski space
// R^{D,1} with <u,v> = -u_0 v_0 + sum_i u_i v_i. Isometries are orthochronous
// Lorentz matrices. Klein coordinates are used only for convexity questions.
//
// Global hyperboloid coordinates grow like e^r at distance r from the origin,
// and inner products of two such points cancel catastrophically (absolute error
// ~ e^{2r} * machine epsilon). Routines that need accuracy far from the origin
// first move the query point to the origin (see `to_local_frame`).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "hsaw/error.hpp"
#include "hsaw/rng.hpp"

namespace hsaw {

template <int D>
using Ambient = Eigen::Matrix<double, D + 1, 1>;
template <int D>
using Spatial = Eigen::Matrix<double, D, 1>;
template <int D>
using LorentzMatrix = Eigen::Matrix<double, D + 1, D + 1>;
template <int D>
using OrthogonalMatrix = Eigen::Matrix<double, D, D>;

namespace tol {
inline constexpr double hyperboloid = 1e-9;   // invariant checks
inline constexpr double drift = 1e-6;         // refuse to renormalize beyond this
inline constexpr double isometry = 1e-8;
inline constexpr double orthogonal = 1e-9;
inline constexpr double coincident = 1e-12;   // points closer than this are "equal"
inline constexpr double max_distance = 700.0; // cosh overflows past ~710
}  // namespace tol

template <int D>
double mink_inner(const Ambient<D>& u, const Ambient<D>& v) {
  return -u[0] * v[0] + u.template tail<D>().dot(v.template tail<D>());
}

/// Runtime-dimension Minkowski form, for data whose dimension is not known at
/// compile time (deserialized vectors, CLI input).
inline double mink_inner(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw UsageError("mink_inner: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()) + ")");
  }
  if (u.size() < 3) throw UsageError("mink_inner: need d + 1 >= 3 coordinates");
  double acc = -u[0] * v[0];
  for (std::size_t i = 1; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

/// A point of H^D in hyperboloid coordinates.
template <int D>
class HPoint {
  static_assert(D >= 2, "hyperbolic space of dimension >= 2");

 public:
  static constexpr int dimension = D;

  static HPoint origin() {
    HPoint p;
    p.coords_.setZero();
    p.coords_[0] = 1.0;
    return p;
  }

  /// (cosh r, sinh r * u) for a Euclidean unit vector u.
  static HPoint from_polar(double r, const Spatial<D>& u) {
    if (!(r <= tol::max_distance)) {
      throw NumericIntegrityError("point beyond distance " + std::to_string(tol::max_distance));
    }
    HPoint p;
    p.coords_[0] = std::cosh(r);
    p.coords_.template tail<D>() = std::sinh(r) * u;
    p.coords_[0] = std::hypot(1.0, p.coords_.template tail<D>().stableNorm());
    return p;
  }

  /// Validates the hyperboloid invariant (tolerance relative to x_0^2, the
  /// scale at which <x,x> can be resolved) and projects exactly onto the sheet.
  static HPoint from_coords(const Ambient<D>& x) { return checked(x, tol::hyperboloid); }

  /// Projection after an isometry or other floating-point drift: refuses when
  /// the drift exceeds `tol::drift`.
  static HPoint renormalized(const Ambient<D>& x) { return checked(x, tol::drift); }

  const Ambient<D>& coords() const { return coords_; }
  double time() const { return coords_[0]; }
  auto spatial() const { return coords_.template tail<D>(); }
  /// Distance from the origin, accurate at every radius.
  double radius() const { return std::asinh(spatial().stableNorm()); }

  bool operator==(const HPoint&) const = default;

 private:
  HPoint() = default;

  static HPoint checked(const Ambient<D>& x, double tolerance) {
    if (!x.allFinite()) throw NumericIntegrityError("non-finite hyperboloid coordinates");
    if (!(x[0] > 0.0)) throw NumericIntegrityError("point not on the positive sheet");
    // <x,x> + 1 = (h - x0)(h + x0) with h = sqrt(1 + |x_s|^2); evaluated in
    // this factored form it cannot overflow at any representable radius.
    const double h = std::hypot(1.0, x.template tail<D>().stableNorm());
    const double root = std::max(1.0, x[0]);
    const double defect = std::abs(h - x[0]) / root * ((h + x[0]) / root);
    if (!(defect <= tolerance)) {
      throw NumericIntegrityError("point off the hyperboloid: relative defect " + std::to_string(defect));
    }
    HPoint p;
    p.coords_ = x;
    p.coords_[0] = h;
    return p;
  }

  Ambient<D> coords_;
};

/// A tangent vector `vec` at `base`: <base, vec> = 0.
template <int D>
struct TangentVector {
  HPoint<D> base;
  Ambient<D> vec;

  static TangentVector at(const HPoint<D>& base, const Ambient<D>& vec) {
    const double scale = std::max(1.0, base.coords().norm() * vec.norm());
    if (std::abs(mink_inner<D>(base.coords(), vec)) > tol::hyperboloid * scale) {
      throw UsageError("vector is not tangent at its base point");
    }
    return TangentVector{base, vec};
  }

  /// Tangent vector at the origin with spatial part `u`.
  static TangentVector at_origin(const Spatial<D>& u) {
    Ambient<D> v;
    v[0] = 0.0;
    v.template tail<D>() = u;
    return TangentVector{HPoint<D>::origin(), v};
  }

  double norm_squared() const { return mink_inner<D>(vec, vec); }

  bool is_unit() const {
    const double scale = std::max(1.0, vec.squaredNorm());
    return std::abs(norm_squared() - 1.0) <= tol::hyperboloid * scale;
  }
};

/// Orthochronous Lorentz transform acting on H^D.
template <int D>
class Isometry {
 public:
  static Isometry identity() { return Isometry(LorentzMatrix<D>::Identity()); }

  /// Validates that `m` preserves the Minkowski form and the positive sheet.
  static Isometry from_matrix(const LorentzMatrix<D>& m) {
    LorentzMatrix<D> eta = LorentzMatrix<D>::Identity();
    eta(0, 0) = -1.0;
    const LorentzMatrix<D> defect = m.transpose() * eta * m - eta;
    const double scale = std::max(1.0, m.squaredNorm());
    if (defect.cwiseAbs().maxCoeff() > tol::isometry * scale) {
      throw UsageError("matrix does not preserve the Minkowski form");
    }
    if (!(m(0, 0) >= 1.0 - tol::isometry)) throw UsageError("matrix is not orthochronous");
    return Isometry(m);
  }

  /// The isometry fixing the origin that acts as `r` on spatial coordinates.
  static Isometry embed(const OrthogonalMatrix<D>& r) {
    LorentzMatrix<D> m = LorentzMatrix<D>::Identity();
    m.template bottomRightCorner<D, D>() = r;
    return Isometry(m);
  }

  const LorentzMatrix<D>& matrix() const { return m_; }

  HPoint<D> operator()(const HPoint<D>& p) const {
    return HPoint<D>::renormalized(m_ * p.coords());
  }
  TangentVector<D> operator()(const TangentVector<D>& v) const {
    return TangentVector<D>{(*this)(v.base), m_ * v.vec};
  }

  Isometry operator*(const Isometry& other) const { return Isometry(m_ * other.m_); }

  /// Lorentz inverse eta * M^T * eta.
  Isometry inverse() const {
    LorentzMatrix<D> inv = m_.transpose();
    inv.template block<1, D>(0, 1) *= -1.0;
    inv.template block<D, 1>(1, 0) *= -1.0;
    return Isometry(inv);
  }

 private:
  explicit Isometry(const LorentzMatrix<D>& m) : m_(m) {}
  LorentzMatrix<D> m_;
};

/// A point of the open unit ball (Beltrami-Klein model).
template <int D>
struct KleinPoint {
  Spatial<D> coords;
};

// ---------------------------------------------------------------------------
// Distances

/// Hyperbolic distance. Uses arccosh(-<p,q>) for well-separated points and
/// 2 asinh(|p - q|_M / 2) when they are close, avoiding arccosh near 1.
template <int D>
double dist(const HPoint<D>& p, const HPoint<D>& q) {
  const double m = -mink_inner<D>(p.coords(), q.coords());
  if (!std::isfinite(m)) throw NumericIntegrityError("distance overflow");
  const double scale = std::max(1.0, p.time() * q.time());
  if (m < 1.0 - tol::hyperboloid * scale) {
    throw NumericIntegrityError("-<p,q> < 1: input off the hyperboloid");
  }
  if (m > 2.0) return std::acosh(m);
  const Ambient<D> diff = p.coords() - q.coords();
  const double chord2 = std::max(0.0, mink_inner<D>(diff, diff));
  return 2.0 * std::asinh(0.5 * std::sqrt(chord2));
}

// ---------------------------------------------------------------------------
// Exponential / logarithm maps

/// The point at arc length t along the geodesic leaving p with unit velocity v.
/// Negative t walks the opposite way.
template <int D>
HPoint<D> geodesic_at(const HPoint<D>& p, const Ambient<D>& v, double t) {
  if (std::abs(t) > tol::max_distance) throw NumericIntegrityError("geodesic step too long");
  return HPoint<D>::renormalized(std::cosh(t) * p.coords() + std::sinh(t) * v);
}

template <int D>
HPoint<D> exp_map(const HPoint<D>& p, const TangentVector<D>& v, double t) {
  if (!v.is_unit()) throw UsageError("exp_map: direction is not a unit tangent vector");
  if (t < 0.0) throw UsageError("exp_map: negative length");
  if (t == 0.0) return p;
  return geodesic_at<D>(p, v.vec, t);
}

template <int D>
struct LogResult {
  TangentVector<D> direction;  // unit
  double length;
};

template <int D>
LorentzMatrix<D> boost_from(const HPoint<D>& p);

template <int D>
LogResult<D> log_map(const HPoint<D>& p, const HPoint<D>& q) {
  const double t = dist(p, q);
  if (t < tol::coincident) throw DegenerateInputError("log_map: coincident points");
  // Direction of q seen from p's frame, carried back by the boost to p. The
  // Euclidean normalization there is exact; normalizing the ambient tangential
  // component by its Minkowski norm instead cancels catastrophically once p and
  // q are far from the origin.
  const double x0 = p.time();
  const auto xs = p.spatial();
  const Spatial<D> seen = (boost_from(p) * q.coords()).template tail<D>();
  const double sn = seen.stableNorm();
  if (!(sn > 0.0)) throw DegenerateInputError("log_map: coincident points");
  const Spatial<D> dir = seen / sn;
  Ambient<D> v;
  v[0] = xs.dot(dir);
  v.template tail<D>() = dir + (v[0] / (1.0 + x0)) * xs;
  return {TangentVector<D>{p, v}, t};
}

/// Point at fraction s in [0, 1] of the constant-speed geodesic from a to b.
template <int D>
HPoint<D> geodesic_point(const HPoint<D>& a, const HPoint<D>& b, double s) {
  const double len = dist(a, b);
  if (len < tol::coincident) return a;
  if (len > 1.0) {
    // sinh interpolation: coefficients stay O(1) where the result is O(1).
    const double sl = std::sinh(len);
    return HPoint<D>::renormalized(std::sinh((1.0 - s) * len) / sl * a.coords() +
                                   std::sinh(s * len) / sl * b.coords());
  }
  const auto lg = log_map(a, b);
  return geodesic_at<D>(a, lg.direction.vec, s * len);
}

// ---------------------------------------------------------------------------
// Isometries

/// Lorentz boost L with L(o) = p, acting trivially on the Euclidean complement
/// of p's spatial direction.
template <int D>
Isometry<D> boost_to(const HPoint<D>& p) {
  const double x0 = p.time();
  const auto xs = p.spatial();
  LorentzMatrix<D> m;
  m(0, 0) = x0;
  m.template block<1, D>(0, 1) = xs.transpose();
  m.template block<D, 1>(1, 0) = xs;
  m.template bottomRightCorner<D, D>() =
      OrthogonalMatrix<D>::Identity() + xs * xs.transpose() / (1.0 + x0);
  return Isometry<D>::from_matrix(m);
}

/// boost_to(p)^{-1}, built directly.
template <int D>
LorentzMatrix<D> boost_from(const HPoint<D>& p) {
  const double x0 = p.time();
  const auto xs = p.spatial();
  LorentzMatrix<D> m;
  m(0, 0) = x0;
  m.template block<1, D>(0, 1) = -xs.transpose();
  m.template block<D, 1>(1, 0) = -xs;
  m.template bottomRightCorner<D, D>() =
      OrthogonalMatrix<D>::Identity() + xs * xs.transpose() / (1.0 + x0);
  return m;
}

template <int D>
bool is_orthogonal(const OrthogonalMatrix<D>& r, double tolerance = tol::orthogonal) {
  return (r.transpose() * r - OrthogonalMatrix<D>::Identity()).cwiseAbs().maxCoeff() <= tolerance;
}

/// Isometry fixing p that acts as r in the frame boost_to(p) carries there.
template <int D>
Isometry<D> rotation_fixing(const HPoint<D>& p, const OrthogonalMatrix<D>& r) {
  if (!is_orthogonal<D>(r)) throw UsageError("rotation_fixing: matrix is not orthogonal");
  const Isometry<D> b = boost_to(p);
  return b * Isometry<D>::embed(r) * b.inverse();
}

/// Haar-distributed element of O(D): QR of a Gaussian matrix with the R
/// diagonal made positive, then a fair-coin sign flip of the first row.
template <int D>
OrthogonalMatrix<D> random_rotation(Rng& rng) {
  OrthogonalMatrix<D> g;
  for (int j = 0; j < D; ++j)
    for (int i = 0; i < D; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<OrthogonalMatrix<D>> qr(g);
  OrthogonalMatrix<D> q = qr.householderQ();
  const OrthogonalMatrix<D> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int i = 0; i < D; ++i) {
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  }
  if (rng.coin()) q.row(0) *= -1.0;
  return q;
}

/// Uniform point of the Euclidean unit sphere S^{D-1} (normalized Gaussian).
template <int D>
Spatial<D> random_unit_direction(Rng& rng) {
  Spatial<D> u;
  double n2 = 0.0;
  do {
    for (int i = 0; i < D; ++i) u[i] = rng.normal();
    n2 = u.squaredNorm();
  } while (n2 < 1e-300);
  return u / std::sqrt(n2);
}

/// Parallel transport of v (tangent at p) along the geodesic from p to q.
template <int D>
TangentVector<D> parallel_transport(const HPoint<D>& p, const HPoint<D>& q,
                                    const TangentVector<D>& v) {
  const double pq = mink_inner<D>(p.coords(), q.coords());
  if (dist(p, q) < tol::coincident) return TangentVector<D>{q, v.vec};
  const Ambient<D> sum = p.coords() + q.coords();
  const Ambient<D> out = v.vec + (mink_inner<D>(q.coords(), v.vec) / (1.0 - pq)) * sum;
  return TangentVector<D>{q, out};
}

// ---------------------------------------------------------------------------
// Klein model

template <int D>
KleinPoint<D> klein_project(const HPoint<D>& p) {
  return KleinPoint<D>{p.spatial() / p.time()};
}

template <int D>
HPoint<D> klein_lift(const KleinPoint<D>& k) {
  const double n2 = k.coords.squaredNorm();
  if (!(n2 < 1.0)) throw UsageError("klein_lift: point outside the open unit ball");
  const double x0 = 1.0 / std::sqrt(1.0 - n2);
  Ambient<D> x;
  x[0] = x0;
  x.template tail<D>() = x0 * k.coords;
  return HPoint<D>::from_coords(x);
}

// ---------------------------------------------------------------------------
// Point-to-geodesic distances

namespace detail {

/// Position of q in coordinates where p sits at the origin; not renormalized.
template <int D>
Ambient<D> to_local_frame(const HPoint<D>& p, const HPoint<D>& q) {
  return boost_from(p) * q.coords();
}

/// Distance from the origin to the geodesic through local points a, b, as a
/// chord of the Klein ball. The hyperbolic foot of the perpendicular from the
/// centre is the Euclidean foot on the chord. `clamp` restricts to the segment.
template <int D>
double origin_to_geodesic(const Ambient<D>& a, const Ambient<D>& b, bool clamp) {
  const Spatial<D> ka = a.template tail<D>() / a[0];
  const Spatial<D> kb = b.template tail<D>() / b[0];
  const Spatial<D> dir = kb - ka;
  const double len2 = dir.squaredNorm();
  double tau = 0.0;
  if (len2 > 0.0) tau = -ka.dot(dir) / len2;
  if (clamp) {
    if (tau <= 0.0) return std::asinh(a.template tail<D>().stableNorm());
    if (tau >= 1.0) return std::asinh(b.template tail<D>().stableNorm());
  }
  const double rho = (ka + tau * dir).norm();
  return std::atanh(std::min(rho, 1.0 - std::numeric_limits<double>::epsilon()));
}

/// Golden-section minimization of a unimodal function on [lo, hi].
template <typename F>
double golden_section_min(F&& f, double lo, double hi, int iterations = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < iterations && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({f1, f2, f(0.5 * (lo + hi))});
}

}  // namespace detail

/// Distance from p to the complete geodesic through a and b.
template <int D>
double dist_to_geodesic_line(const HPoint<D>& p, const HPoint<D>& a, const HPoint<D>& b) {
  if (dist(a, b) < tol::coincident) {
    throw DegenerateInputError("dist_to_geodesic_line: a and b coincide");
  }
  return detail::origin_to_geodesic<D>(detail::to_local_frame(p, a),
                                       detail::to_local_frame(p, b), false);
}

/// Distance from p to the geodesic segment [a, b]; a == b degenerates to dist(p, a).
template <int D>
double dist_to_geodesic_segment(const HPoint<D>& p, const HPoint<D>& a, const HPoint<D>& b) {
  if (dist(a, b) < tol::coincident) return dist(p, a);
  return detail::origin_to_geodesic<D>(detail::to_local_frame(p, a),
                                       detail::to_local_frame(p, b), true);
}

/// Same quantity by direct golden-section minimization of t -> dist(p, gamma(t))
/// along the line, with bracket expansion. Independent cross-check of the
/// closed form; accurate where global coordinates are (moderate radii).
template <int D>
double dist_to_geodesic_line_search(const HPoint<D>& p, const HPoint<D>& a, const HPoint<D>& b) {
  const auto lg = log_map(a, b);
  auto f = [&](double s) { return dist(p, geodesic_at<D>(a, lg.direction.vec, s)); };
  double lo = -1.0;
  double hi = lg.length + 1.0;
  // Widen each end until f decreases from it towards the interior.
  while (!(f(lo) > f(lo + 1e-3)) && lo > -tol::max_distance / 4) lo = 2.0 * lo - 1.0;
  while (!(f(hi) > f(hi - 1e-3)) && hi < tol::max_distance / 4) hi = 2.0 * hi + 1.0;
  return detail::golden_section_min(f, lo, hi);
}

/// Ternary/golden-section minimization over the segment parameter in [0, 1].
template <int D>
double dist_to_geodesic_segment_search(const HPoint<D>& p, const HPoint<D>& a,
                                       const HPoint<D>& b) {
  if (dist(a, b) < tol::coincident) return dist(p, a);
  auto f = [&](double s) { return dist(p, geodesic_point(a, b, s)); };
  return std::min({detail::golden_section_min(f, 0.0, 1.0), f(0.0), f(1.0)});
}

}  // namespace hsaw
