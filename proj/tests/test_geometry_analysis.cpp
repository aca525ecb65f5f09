#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "hsaw/geometry_analysis.hpp"
#include "hsaw/hyperbolic.hpp"
#include "hsaw/rng.hpp"
#include "hsaw/samplers.hpp"
#include "hsaw/walk.hpp"

using namespace hsaw;

namespace {

template <int D>
Spatial<D> axis(int k) {
  Spatial<D> u = Spatial<D>::Zero();
  u[k] = 1.0;
  return u;
}

template <int D>
HPoint<D> polar(double r, double angle) {
  Spatial<D> u = Spatial<D>::Zero();
  u[0] = std::cos(angle);
  u[1] = std::sin(angle);
  return HPoint<D>::from_polar(r, u);
}

SawParams params_for(int d, double c, int n, double eps = 1.0) {
  SawParams p;
  p.d = d;
  p.c = c;
  p.n = n;
  p.eps = eps;
  return p;
}

/// Hyperbolic midpoint from raw coordinates: (x + y) normalized onto the sheet.
template <int D>
Ambient<D> raw_midpoint(const Ambient<D>& x, const Ambient<D>& y) {
  const Ambient<D> s = x + y;
  return s / std::sqrt(-mink_inner<D>(s, s));
}

template <int D>
double raw_dist(const Ambient<D>& x, const Ambient<D>& y) {
  return std::acosh(std::max(1.0, -mink_inner<D>(x, y)));
}

/// Distance from p to the segment [a, b] by golden-section search on the
/// (convex) distance along the segment.
double golden_segment_distance(const HPoint<2>& p, const HPoint<2>& a, const HPoint<2>& b) {
  const double len = dist(a, b);
  const auto lg = log_map(a, b);
  auto f = [&](double s) { return dist(p, geodesic_at<2>(a, lg.direction.vec, s)); };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = len;
  for (int it = 0; it < 200; ++it) {
    const double m1 = hi - g * (hi - lo);
    const double m2 = lo + g * (hi - lo);
    (f(m1) < f(m2) ? hi : lo) = f(m1) < f(m2) ? m2 : m1;
  }
  return std::min({f(0.5 * (lo + hi)), f(0.0), f(len)});
}

}  // namespace

// ---------------------------------------------------------------------------
// Thin triangles

TEST(Thinness, DegenerateTrianglesAreZero) {
  const auto o = HPoint<2>::origin();
  const auto a = HPoint<2>::from_polar(2.0, axis<2>(0));
  const auto b = HPoint<2>::from_polar(3.5, axis<2>(0));
  EXPECT_NEAR(triangle_thinness(o, a, b), 0.0, 1e-9);
  EXPECT_NEAR(triangle_thinness(o, o, a), 0.0, 1e-12);
  EXPECT_NEAR(triangle_thinness_from_sides({1.5, 2.0, 3.5}), 0.0, 1e-9);
  EXPECT_NEAR(triangle_thinness_from_sides({0.0, 2.0, 2.0}), 0.0, 1e-9);
}

TEST(Thinness, LargeEquilateralTriangleApproachesTheIdealBound) {
  // An ideal triangle has thinness asinh(1); large finite ones approach it
  // from below.
  const double ideal = std::asinh(1.0);
  for (double r : {8.0, 20.0}) {
    const PolarPoint<2> v[3] = {{r, Spatial<2>(1.0, 0.0)},
                                {r, Spatial<2>(std::cos(2.0 * std::numbers::pi / 3), std::sin(2.0 * std::numbers::pi / 3))},
                                {r, Spatial<2>(std::cos(4.0 * std::numbers::pi / 3), std::sin(4.0 * std::numbers::pi / 3))}};
    const double s = polar_distance(v[0], v[1]);
    const double t = triangle_thinness_from_sides({s, s, s});
    EXPECT_LE(t, ideal + 1e-9);
    EXPECT_GT(t, ideal - 0.01) << "radius " << r;
  }
}

TEST(Thinness, SideFormulaAgreesWithHyperboloidRoute) {
  Rng rng(31);
  for (int rep = 0; rep < 300; ++rep) {
    PolarPoint<3> v[3];
    std::vector<HPoint<3>> h;
    for (int k = 0; k < 3; ++k) {
      v[k] = {rng.uniform(0.0, 4.0), random_unit_direction<3>(rng)};
      h.push_back(HPoint<3>::from_polar(v[k].radius, v[k].direction));
    }
    const TriangleSides t{polar_distance(v[1], v[2]), polar_distance(v[2], v[0]), polar_distance(v[0], v[1])};
    EXPECT_NEAR(t.a, dist(h[1], h[2]), 1e-9);
    const double trig = triangle_thinness_from_sides(t);
    const double direct = triangle_thinness(h[0], h[1], h[2]);
    // Both sample the sides on the same grid; they differ by rounding only.
    EXPECT_NEAR(trig, direct, 1e-7) << "rep " << rep;
  }
}

TEST(Thinness, VolumeRadiusFollowsTheSinhLaw) {
  // P(r < cap - 1) -> e^{-(D-1)} for large caps.
  for (int d : {2, 3}) {
    Rng rng(32);
    int below = 0;
    constexpr int n = 100'000;
    for (int k = 0; k < n; ++k) {
      const double r = d == 2 ? sample_volume_radius<2>(20.0, rng) : sample_volume_radius<3>(20.0, rng);
      ASSERT_GE(r, 0.0);
      ASSERT_LE(r, 20.0);
      below += r < 19.0;
    }
    const double expected = std::exp(-(d - 1.0));
    const double se = std::sqrt(expected * (1.0 - expected) / n);
    EXPECT_NEAR(static_cast<double>(below) / n, expected, 4.0 * se) << "d = " << d;
  }
}

TEST(DeltaEstimate, ExtendingTheSampleIsMonotoneAndBoundedByTheIdealTriangle) {
  Rng a(33);
  Rng b(33);
  const auto small = estimate_delta<2>(200, 20.0, a);
  const auto large = estimate_delta<2>(2000, 20.0, b, 2);
  EXPECT_GE(large.max_observed, small.max_observed);
  EXPECT_LE(large.max_observed, std::asinh(1.0) + 1e-9);
  EXPECT_GE(large.delta, large.max_observed);
  EXPECT_LT(large.delta - large.max_observed, 1e-3 + 1e-12);
  EXPECT_EQ(large.samples, 2000);
  Rng c(33);
  EXPECT_THROW(estimate_delta<2>(0, 20.0, c), UsageError);
}

TEST(DeltaEstimate, ParallelismDoesNotChangeTheResult) {
  Rng a(34);
  Rng b(34);
  EXPECT_EQ(estimate_delta<3>(500, 10.0, a, 1).max_observed, estimate_delta<3>(500, 10.0, b, 4).max_observed);
}

// ---------------------------------------------------------------------------
// Convex hulls

TEST(ConvexHull, TriangleWithInteriorPoint) {
  const std::vector<HPoint<2>> pts = {polar<2>(2.0, 0.0), polar<2>(2.5, 2.0), polar<2>(1.8, 4.2),
                                      HPoint<2>::origin()};
  const auto hull = convex_hull(pts);
  EXPECT_FALSE(hull.degenerate);
  EXPECT_EQ(std::set<int>(hull.boundary_indices.begin(), hull.boundary_indices.end()), (std::set<int>{0, 1, 2}));
  for (int k = 0; k < 3; ++k) EXPECT_EQ(hull.per_point_boundary_distance[static_cast<std::size_t>(k)], 0.0);
  const double expected = std::min({golden_segment_distance(pts[3], pts[0], pts[1]),
                                    golden_segment_distance(pts[3], pts[1], pts[2]),
                                    golden_segment_distance(pts[3], pts[2], pts[0])});
  EXPECT_NEAR(hull.per_point_boundary_distance[3], expected, 1e-8);
  EXPECT_GT(expected, 0.1);
}

TEST(ConvexHull, DegenerateInputs) {
  EXPECT_THROW(convex_hull({}), UsageError);
  const auto one = convex_hull({polar<2>(1.0, 0.3)});
  EXPECT_TRUE(one.degenerate);
  EXPECT_EQ(one.boundary_indices, std::vector<int>{0});
  const auto two = convex_hull({polar<2>(1.0, 0.3), polar<2>(2.0, 1.3)});
  EXPECT_TRUE(two.degenerate);
  EXPECT_EQ(two.boundary_indices.size(), 2u);
  std::vector<HPoint<2>> line;
  for (int k = 0; k < 6; ++k) line.push_back(HPoint<2>::from_polar(k - 2.5, axis<2>(1)));
  const auto col = convex_hull(line);
  EXPECT_TRUE(col.degenerate);
  for (double x : col.per_point_boundary_distance) EXPECT_EQ(x, 0.0);
}

TEST(ConvexHull, IdempotentAndEquivariantUnderIsometries) {
  Rng rng(35);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<HPoint<2>> pts;
    for (int k = 0; k < 40; ++k) {
      pts.push_back(HPoint<2>::from_polar(sample_volume_radius<2>(3.0, rng), random_unit_direction<2>(rng)));
    }
    const auto hull = convex_hull(pts);
    ASSERT_FALSE(hull.degenerate);
    const auto again = convex_hull(hull.boundary_vertices);
    EXPECT_EQ(again.boundary_indices.size(), hull.boundary_indices.size());
    for (double x : again.per_point_boundary_distance) EXPECT_EQ(x, 0.0);

    const Isometry<2> L =
        boost_to(HPoint<2>::from_polar(rng.uniform(0.0, 3.0), random_unit_direction<2>(rng))) *
        Isometry<2>::embed(random_rotation<2>(rng));
    std::vector<HPoint<2>> moved;
    for (const auto& p : pts) moved.push_back(L(p));
    const auto mh = convex_hull(moved);
    EXPECT_EQ(std::set<int>(mh.boundary_indices.begin(), mh.boundary_indices.end()),
              std::set<int>(hull.boundary_indices.begin(), hull.boundary_indices.end()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
      EXPECT_NEAR(mh.per_point_boundary_distance[k], hull.per_point_boundary_distance[k], 1e-8);
    }
  }
}

TEST(SurfaceDensity, GeodesicAndShortWalksAreAllBoundary) {
  const auto g = surface_density(geodesic_walk<2>(params_for(2, 0.5, 20)));
  EXPECT_EQ(g.fraction, 1.0);
  EXPECT_EQ(g.threshold, 0.25);
  Rng rng(36);
  const auto p2 = params_for(2, 0.5, 2);
  EXPECT_EQ(surface_density(rejection_sample<2>(p2, rng).walk).fraction, 1.0);
}

TEST(SurfaceDensity, RandomWalksHaveBoundaryVertices) {
  Rng rng(37);
  const auto p = params_for(2, 0.5, 30);
  for (int rep = 0; rep < 20; ++rep) {
    const auto w = rejection_sample<2>(p, rng).walk;
    const auto s = surface_density(w);
    EXPECT_GE(s.fraction, 3.0 / 31.0);  // at least three hull vertices
    EXPECT_LE(s.fraction, 1.0);
  }
}

// ---------------------------------------------------------------------------
// Two geodesics

TEST(SegmentDistance, SharedEndpointAndCrossing) {
  const auto o = HPoint<3>::origin();
  const auto y0 = HPoint<3>::from_polar(3.0, axis<3>(0));
  EXPECT_EQ(segment_to_segment_distance(o, HPoint<3>::from_polar(2.0, axis<3>(1)), o, y0), 0.0);
  // A segment crossing [o, y0] at its midpoint.
  const auto mid = HPoint<3>::from_polar(1.5, axis<3>(0));
  const Ambient<3> normal = boost_to(mid).matrix().col(2);
  const auto up = exp_map(mid, TangentVector<3>{mid, normal}, 1.0);
  const auto down = exp_map(mid, TangentVector<3>{mid, Ambient<3>(-normal)}, 1.0);
  EXPECT_LT(segment_to_segment_distance(up, down, o, y0), 1e-9);
}

TEST(SegmentDistance, SymmetricQuadrilateralMatchesRawMidpoints) {
  // x and y at equal arc length t along the perpendiculars at the ends of a
  // base of length s: the closest pair is the two midpoints, and as t grows
  // the distance tends to atanh(1 / cosh(s / 2)).
  const double s = 3.0;
  const auto x0 = HPoint<2>::origin();
  const auto y0 = HPoint<2>::from_polar(s, axis<2>(0));
  Ambient<2> perp = Ambient<2>::Zero();
  perp[2] = 1.0;
  for (double t : {0.5, 1.0, 2.0, 5.0, 20.0}) {
    const auto x = geodesic_at<2>(x0, perp, t);
    const auto y = geodesic_at<2>(y0, perp, t);
    const double expected = raw_dist<2>(raw_midpoint<2>(x.coords(), y.coords()),
                                        raw_midpoint<2>(x0.coords(), y0.coords()));
    const double got = segment_to_segment_distance(x, y, x0, y0, 1e-4);
    EXPECT_NEAR(got, expected, 1e-6) << "t = " << t;
  }
  const double limit = std::atanh(1.0 / std::cosh(s / 2));
  EXPECT_NEAR(limit, 0.453896, 1e-6);
  const auto x = geodesic_at<2>(x0, perp, 30.0);
  const auto y = geodesic_at<2>(y0, perp, 30.0);
  EXPECT_NEAR(segment_to_segment_distance(x, y, x0, y0, 1e-4), limit, 1e-6);
}

TEST(TwoGeodesics, MaximumSaturatesBelowTwoDelta) {
  Rng rng(38);
  const auto r = verify_two_geodesics<2>(0.89, 300, rng);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.violations, 0);
  EXPECT_EQ(r.threshold, 1.78);
  EXPECT_LE(r.max_observed, std::atanh(1.0 / std::cosh(1.5)) + r.discretization_bound);
  Rng r3(38);
  EXPECT_TRUE(verify_two_geodesics<3>(0.89, 100, r3, 3.0, 50.0, 2).pass);
  EXPECT_THROW(verify_two_geodesics<2>(0.89, 10, rng, 2.67), UsageError);
  EXPECT_THROW(verify_two_geodesics<2>(0.89, 0, rng), UsageError);
}

// ---------------------------------------------------------------------------
// Near-geodesic vertices

TEST(NearGeodesic, GeodesicWalkIsEntirelyNear) {
  for (double C : {0.0, 0.5, 3.0}) {
    EXPECT_EQ(near_geodesic_fraction(geodesic_walk<3>(params_for(3, 0.5, 40)), C), 1.0);
    EXPECT_EQ(near_geodesic_fraction(geodesic_walk<2>(params_for(2, 0.5, 300, 2.0)), C), 1.0);
  }
}

TEST(NearGeodesic, EndpointsAlwaysCountAndLargeCCountsAll) {
  Rng rng(39);
  const auto p = params_for(2, 0.5, 20);
  for (int rep = 0; rep < 20; ++rep) {
    const auto w = rejection_sample<2>(p, rng).walk;
    EXPECT_GE(near_geodesic_count(w, 0.0), 2);
    EXPECT_EQ(near_geodesic_fraction(w, 100.0), 1.0);
  }
  const auto loop = develop<2>({axis<2>(0), -axis<2>(0)}, params_for(2, 0.5, 2));
  EXPECT_THROW(near_geodesic_count(loop, 1.0), DegenerateInputError);
  EXPECT_THROW(near_geodesic_count(geodesic_walk<2>(p), -1.0), UsageError);
}

TEST(NearGeodesic, MatchesGlobalCoordinatesAtModerateRadius) {
  Rng rng(40);
  const auto p = params_for(2, 0.5, 15);
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = rejection_sample<2>(p, rng).walk;
    const double C = rng.uniform(0.2, 2.0);
    std::int64_t count = 0;
    for (int i = 0; i <= 15; ++i) count += dist_to_geodesic_segment(w.point(i), w.point(0), w.point(15)) <= C;
    EXPECT_EQ(near_geodesic_count(w, C), count);
  }
}
