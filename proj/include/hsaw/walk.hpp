#pragma once

// Continuous self-avoiding walks on H^D.
//
// The canonical state of a walk is its sequence of frame-relative step
// directions u_1..u_n. Developing it from the origin with the standard frame
// gives G_k = S(u_1) ... S(u_k), where S(u) is the boost of length eps along u
// (a boost transports the frame in parallel along its own geodesic). Column 0
// of G_k is x_k; columns 1..D are the transported frame at x_k. Frames are
// stored in polar (Cartan) form and advanced by solving one hyperbolic
// triangle per step, so cached vertices keep full relative accuracy even for
// walks that wander far out and come back.
//
// Pairwise distances are evaluated through relative products S(u_{i+1}) ...
// S(u_j), whose size is governed by d(x_i, x_j) rather than by the distance
// of x_i from the origin, so self-avoidance stays exact for long ballistic
// walks whose far end is out of reach of global hyperboloid coordinates.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsaw/error.hpp"
#include "hsaw/hyperbolic.hpp"

namespace hsaw {

enum class SamplerKind { rejection, mcmc };

inline std::string to_string(SamplerKind k) { return k == SamplerKind::mcmc ? "mcmc" : "rejection"; }

struct McmcSettings {
  std::optional<std::int64_t> burn_in;  // default 10 n^2 moves
  std::optional<std::int64_t> thinning; // default n
  double pivot_fraction = 0.8;
  std::optional<int> block_max;         // default min(n, 16)
};

/// Full experiment configuration.
inline constexpr std::int64_t default_rejection_cap = 10'000'000;

struct SawParams {
  int d = 2;
  double c = 0.5;
  int n = 1;
  double eps = 1.0;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::rejection;
  McmcSettings mcmc;
  std::int64_t rejection_cap = default_rejection_cap;  // attempts before a feasibility error

  void validate() const {
    if (d < 2) throw ConfigError("d must be >= 2");
    if (!(c > 0.0 && c < 1.0)) throw ConfigError("c must lie in (0, 1), got " + std::to_string(c));
    if (n < 1) throw ConfigError("n must be >= 1");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be > 0");
    if (rejection_cap < 1) throw ConfigError("rejection_cap must be >= 1");
    if (!(mcmc.pivot_fraction >= 0.0 && mcmc.pivot_fraction <= 1.0)) {
      throw ConfigError("pivot_fraction must lie in [0, 1]");
    }
    if (mcmc.burn_in && *mcmc.burn_in < 0) throw ConfigError("burn_in must be >= 0");
    if (mcmc.thinning && *mcmc.thinning < 1) throw ConfigError("thinning must be >= 1");
    if (mcmc.block_max && (*mcmc.block_max < 1 || *mcmc.block_max > n)) {
      throw ConfigError("block_max must lie in [1, n]");
    }
  }

  /// The self-avoidance radius c * eps.
  double avoidance_radius() const { return c * eps; }
};

struct ResolvedMcmc {
  std::int64_t burn_in;
  std::int64_t thinning;
  double pivot_fraction;
  int block_max;
};

inline ResolvedMcmc resolve_mcmc(const SawParams& p) {
  const auto n = static_cast<std::int64_t>(p.n);
  return ResolvedMcmc{p.mcmc.burn_in.value_or(10 * n * n), p.mcmc.thinning.value_or(n),
                      p.mcmc.pivot_fraction, p.mcmc.block_max.value_or(std::min(p.n, 16))};
}

// ---------------------------------------------------------------------------
// Step boosts

/// cosh/sinh of the step length, with cosh - 1 kept separately for small eps.
struct StepConstants {
  double ch;
  double sh;
  double chm1;

  explicit StepConstants(double eps)
      : ch(std::cosh(eps)), sh(std::sinh(eps)), chm1(2.0 * std::sinh(0.5 * eps) * std::sinh(0.5 * eps)) {}
};

/// Boost S(u) of length eps along the spatial unit vector u.
template <int D>
LorentzMatrix<D> step_boost(const Spatial<D>& u, const StepConstants& k) {
  LorentzMatrix<D> s;
  s(0, 0) = k.ch;
  s.template block<1, D>(0, 1) = k.sh * u.transpose();
  s.template block<D, 1>(1, 0) = k.sh * u;
  s.template bottomRightCorner<D, D>() =
      OrthogonalMatrix<D>::Identity() + k.chm1 * (u * u.transpose());
  return s;
}

namespace detail {

/// v <- S(sign * u) v, in O(D).
template <int D>
void apply_step(Ambient<D>& v, const Spatial<D>& u, const StepConstants& k, double sign) {
  const double uv = u.dot(v.template tail<D>());
  const double v0 = v[0];
  v[0] = k.ch * v0 + sign * k.sh * uv;
  v.template tail<D>() += (sign * k.sh * v0 + k.chm1 * uv) * u;
}

/// Row-vector update r <- r S(u). With r = e0^T S(u_{i+1}) ... S(u_j), the
/// spatial part satisfies |r_s| = sinh d(x_i, x_j).
template <int D>
void advance_row(double& r0, Spatial<D>& rs, const Spatial<D>& u, const StepConstants& k) {
  const double ru = rs.dot(u);
  const double next0 = k.ch * r0 + k.sh * ru;
  rs += (k.sh * r0 + k.chm1 * ru) * u;
  r0 = next0;
}

/// Rotation by `angle` in the oriented plane (e_1, p), p a unit vector with
/// p_1 = 0, applied on the right of `k` (k <- k T) or on the left (k <- T k).
template <int D>
void rotate_right(OrthogonalMatrix<D>& k, const Spatial<D>& p, double angle) {
  const double c = std::cos(angle) - 1.0;
  const double s = std::sin(angle);
  const Spatial<D> a = k.col(0);
  const Spatial<D> b = k * p;
  k.col(0) += c * a + s * b;
  k += (c * b - s * a) * p.transpose();
}

template <int D>
void rotate_left(OrthogonalMatrix<D>& k, const Spatial<D>& p, double angle) {
  const double c = std::cos(angle) - 1.0;
  const double s = std::sin(angle);
  const Eigen::Matrix<double, 1, D> a = k.row(0);
  const Eigen::Matrix<double, 1, D> b = p.transpose() * k;
  k.row(0) += c * a - s * b;
  k += p * (c * b + s * a);
}

}  // namespace detail

/// A developed frame in Cartan form G = K1 A(r) K2: K1, K2 rotations and A(r)
/// the boost of length r along e_1. Column 0 of K1 is the direction of the
/// point from the origin and K2 the frame relative to the radial frame there.
///
/// A step G <- G S(u) only involves the plane spanned by e_1 and K2 u, where
/// it reduces to a hyperbolic triangle with sides r and eps. Solving that
/// triangle in cancellation-free form keeps r and both rotations accurate to a
/// few ulps per step, however far the walk strays and returns; a plain matrix
/// product would lose e^{2 (Gromov product)} in relative accuracy instead.
template <int D>
struct PolarFrame {
  OrthogonalMatrix<D> k1 = OrthogonalMatrix<D>::Identity();
  double r = 0.0;
  OrthogonalMatrix<D> k2 = OrthogonalMatrix<D>::Identity();

  void step(const Spatial<D>& u, double eps, const StepConstants& k) {
    const Spatial<D> w = k2 * u;
    const double c = w[0];
    Spatial<D> p = Spatial<D>::Zero();
    p.template tail<D - 1>() = w.template tail<D - 1>();
    const double s = p.norm();
    if (s > 0.0) {
      p /= s;
    } else {
      p = Spatial<D>::Zero();
      p[1] = 1.0;
    }
    // 1 + cos(alpha), exact also for nearly reversed steps.
    const double one_plus_c = c >= 0.0 ? 1.0 + c : s * s / (1.0 - c);
    const double ch_r = std::cosh(r);
    // New point in the plane: (sinh r' cos phi, sinh r' sin phi) = (x, y).
    const double x = std::sinh(r - eps) + ch_r * k.sh * one_plus_c;
    const double y = k.sh * s;
    // The frame turns against the radial frame by -(phi + area) where the
    // area is the defect of the triangle (origin, old point, new point); in
    // tangent half-angle form it has no cancellation even for hairpins, where
    // the interior angles themselves are all close to 0 or pi.
    const double t = std::tanh(0.5 * r) * std::tanh(0.5 * eps);
    const double one_minus_t = std::cosh(0.5 * (r - eps)) / (std::cosh(0.5 * r) * std::cosh(0.5 * eps));
    const double area = 2.0 * std::atan2(t * s, one_minus_t + t * one_plus_c);
    const double phi = std::atan2(y, x);
    r = std::asinh(std::hypot(x, y));
    if (!(r <= tol::max_distance)) {
      throw NumericIntegrityError("walk beyond distance " + std::to_string(tol::max_distance));
    }
    detail::rotate_right<D>(k1, p, phi);
    detail::rotate_left<D>(k2, p, -(phi + area));
  }

  HPoint<D> point() const { return HPoint<D>::from_polar(r, k1.col(0)); }

  LorentzMatrix<D> matrix() const {
    LorentzMatrix<D> a = LorentzMatrix<D>::Identity();
    a(0, 0) = a(1, 1) = std::cosh(r);
    a(0, 1) = a(1, 0) = std::sinh(r);
    LorentzMatrix<D> m1 = LorentzMatrix<D>::Identity();
    m1.template bottomRightCorner<D, D>() = k1;
    LorentzMatrix<D> m2 = LorentzMatrix<D>::Identity();
    m2.template bottomRightCorner<D, D>() = k2;
    return m1 * a * m2;
  }
};

namespace detail {

inline double gap_from_sinh_norm(double sinh_norm) { return std::asinh(sinh_norm); }

template <int D>
void require_unit(const Spatial<D>& u, std::size_t index) {
  if (!u.allFinite() || std::abs(u.squaredNorm() - 1.0) > 2.0 * tol::hyperboloid) {
    throw UsageError("direction " + std::to_string(index) + " is not a unit vector");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Walk

template <int D>
class Walk {
 public:
  const SawParams& params() const { return params_; }
  int steps() const { return static_cast<int>(directions_.size()); }
  const std::vector<Spatial<D>>& directions() const { return directions_; }
  const std::vector<HPoint<D>>& points() const { return points_; }
  const HPoint<D>& point(int k) const { return points_[static_cast<std::size_t>(k)]; }
  /// G_k in polar form; matrix() has x_k in column 0, the frame at x_k after.
  const std::vector<PolarFrame<D>>& frames() const { return frames_; }

  bool operator==(const Walk& o) const {
    return directions_ == o.directions_ && points_ == o.points_;
  }

  /// Replaces directions[first..] and redevelops from step `first`. The prefix
  /// arithmetic is untouched, so the result is bitwise identical to a full
  /// develop of the new direction sequence.
  void replace_tail(std::size_t first, const std::vector<Spatial<D>>& tail_dirs) {
    if (first + tail_dirs.size() > directions_.size()) throw UsageError("replace_tail: out of range");
    for (std::size_t k = 0; k < tail_dirs.size(); ++k) {
      detail::require_unit<D>(tail_dirs[k], first + k);
      directions_[first + k] = tail_dirs[k];
    }
    redevelop_from(first);
  }

  template <int E>
  friend Walk<E> develop(std::vector<Spatial<E>> directions, const SawParams& params);

 private:
  Walk() = default;

  void redevelop_from(std::size_t first) {
    const StepConstants k(params_.eps);
    for (std::size_t s = first; s < directions_.size(); ++s) {
      frames_[s + 1] = frames_[s];
      frames_[s + 1].step(directions_[s], params_.eps, k);
      points_[s + 1] = frames_[s + 1].point();
    }
  }

  SawParams params_;
  std::vector<Spatial<D>> directions_;
  std::vector<HPoint<D>> points_;
  std::vector<PolarFrame<D>> frames_;
};

/// Develops frame-relative unit directions into a walk starting at the origin
/// with the standard frame.
template <int D>
Walk<D> develop(std::vector<Spatial<D>> directions, const SawParams& params) {
  if (params.d != D) throw UsageError("develop: params.d does not match walk dimension");
  if (static_cast<int>(directions.size()) != params.n) {
    throw UsageError("develop: expected " + std::to_string(params.n) + " directions");
  }
  for (std::size_t k = 0; k < directions.size(); ++k) detail::require_unit<D>(directions[k], k);
  Walk<D> w;
  w.params_ = params;
  w.directions_ = std::move(directions);
  w.frames_.assign(w.directions_.size() + 1, PolarFrame<D>{});
  w.points_.assign(w.directions_.size() + 1, HPoint<D>::origin());
  w.redevelop_from(0);
  return w;
}

/// The straight walk with every direction e_1; self-avoiding for every c < 1.
template <int D>
Walk<D> geodesic_walk(const SawParams& params) {
  Spatial<D> e1 = Spatial<D>::Zero();
  e1[0] = 1.0;
  return develop<D>(std::vector<Spatial<D>>(static_cast<std::size_t>(params.n), e1), params);
}

// ---------------------------------------------------------------------------
// Self-avoidance

/// Strict self-avoidance over all pairs 0 <= i < j <= n of the walk developed
/// from `directions`: d(x_i, x_j) > c * eps. Checked in growth order (vertex j
/// against all earlier vertices), so a violating prefix exits early.
template <int D>
bool is_self_avoiding(const std::vector<Spatial<D>>& directions, const SawParams& params) {
  const StepConstants k(params.eps);
  const double radius = params.avoidance_radius();
  const double sinh_r = std::sinh(radius);
  const double hi = sinh_r * sinh_r * (1.0 + 1e-12);
  const double lo = sinh_r * sinh_r * (1.0 - 1e-12);
  const std::size_t n = directions.size();
  std::vector<double> r0(n + 1, 1.0);
  std::vector<Spatial<D>> rs(n + 1, Spatial<D>::Zero());
  for (std::size_t j = 1; j <= n; ++j) {
    const Spatial<D>& u = directions[j - 1];
    for (std::size_t i = 0; i < j; ++i) {
      detail::advance_row<D>(r0[i], rs[i], u, k);
      const double s2 = rs[i].squaredNorm();
      if (s2 > hi) continue;
      if (s2 < lo) return false;
      if (!(detail::gap_from_sinh_norm(std::sqrt(s2)) > radius)) return false;
    }
  }
  return true;
}

template <int D>
bool is_self_avoiding(const Walk<D>& w) {
  return is_self_avoiding<D>(w.directions(), w.params());
}

struct PairGap {
  double length;
  int i;
  int j;
};

/// Minimum distance over non-adjacent pairs |i - j| >= 2, ties broken
/// lexicographically on (i, j).
template <int D>
PairGap min_pairwise_gap(const Walk<D>& w) {
  const int n = w.steps();
  if (n < 2) throw DegenerateInputError("min_pairwise_gap: walk has no non-adjacent pair");
  const StepConstants k(w.params().eps);
  PairGap best{std::numeric_limits<double>::infinity(), -1, -1};
  for (int i = 0; i < n; ++i) {
    double r0 = 1.0;
    Spatial<D> rs = Spatial<D>::Zero();
    for (int j = i + 1; j <= n; ++j) {
      detail::advance_row<D>(r0, rs, w.directions()[static_cast<std::size_t>(j - 1)], k);
      if (j - i < 2) continue;
      const double g = detail::gap_from_sinh_norm(rs.stableNorm());
      if (g < best.length) best = PairGap{g, i, j};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Relative views

/// Position of x_to in the developed frame of x_from, computed through the
/// relative development. Accurate to ~|to - from| ulps regardless of how far
/// either vertex is from the origin.
template <int D>
HPoint<D> relative_position(const Walk<D>& w, int from, int to) {
  const StepConstants k(w.params().eps);
  const auto& dirs = w.directions();
  PolarFrame<D> f;
  if (to > from) {
    for (int s = from + 1; s <= to; ++s) f.step(dirs[static_cast<std::size_t>(s - 1)], w.params().eps, k);
  } else {
    for (int s = from; s > to; --s) f.step(-dirs[static_cast<std::size_t>(s - 1)], w.params().eps, k);
  }
  return f.point();
}

/// All vertices expressed in the frame of x_center.
template <int D>
std::vector<HPoint<D>> recentered_points(const Walk<D>& w, int center) {
  const int n = w.steps();
  if (center < 0 || center > n) throw UsageError("recentered_points: center out of range");
  const StepConstants k(w.params().eps);
  std::vector<HPoint<D>> out(static_cast<std::size_t>(n + 1), HPoint<D>::origin());
  PolarFrame<D> f;
  for (int s = center + 1; s <= n; ++s) {
    f.step(w.directions()[static_cast<std::size_t>(s - 1)], w.params().eps, k);
    out[static_cast<std::size_t>(s)] = f.point();
  }
  f = PolarFrame<D>{};
  for (int s = center; s >= 1; --s) {
    f.step(-w.directions()[static_cast<std::size_t>(s - 1)], w.params().eps, k);
    out[static_cast<std::size_t>(s - 1)] = f.point();
  }
  return out;
}

/// d(x_0, x_n). Exactly eps for a one-step walk.
template <int D>
double end_to_end_distance(const Walk<D>& w) {
  if (w.steps() == 1) return w.params().eps;
  return w.points().back().radius();
}

}  // namespace hsaw
