#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "hsaw/hyperbolic.hpp"
#include "hsaw/rng.hpp"
#include "oracles.hpp"

using namespace hsaw;

namespace {

template <int D>
Spatial<D> axis(int k) {
  Spatial<D> u = Spatial<D>::Zero();
  u[k] = 1.0;
  return u;
}

template <int D>
HPoint<D> random_point(Rng& rng, double max_radius = 3.0) {
  return HPoint<D>::from_polar(rng.uniform(0.0, max_radius), random_unit_direction<D>(rng));
}

/// Unit tangent vector at p in a uniformly random direction.
template <int D>
TangentVector<D> random_unit_tangent(const HPoint<D>& p, Rng& rng) {
  const auto v0 = TangentVector<D>::at_origin(random_unit_direction<D>(rng));
  return boost_to(p)(v0);
}

template <int D>
Ambient<D> random_ambient(Rng& rng) {
  Ambient<D> v;
  for (int i = 0; i <= D; ++i) v[i] = rng.normal();
  return v;
}

template <int D>
Isometry<D> random_isometry(Rng& rng) {
  return boost_to(random_point<D>(rng)) * Isometry<D>::embed(random_rotation<D>(rng));
}

}  // namespace

TEST(MinkInner, DefinitionExamples) {
  EXPECT_DOUBLE_EQ(mink_inner<2>(HPoint<2>::origin().coords(), HPoint<2>::origin().coords()), -1.0);
  const Ambient<3> e1(0.0, 1.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(mink_inner<3>(e1, e1), 1.0);
  const Ambient<2> u(std::cosh(1.0), std::sinh(1.0), 0.0);
  EXPECT_NEAR(mink_inner<2>(u, HPoint<2>::origin().coords()), -1.5430806, 1e-7);
}

TEST(MinkInner, RuntimeSizeMismatchIsUsageError) {
  const std::vector<double> a{1.0, 0.0, 0.0};
  const std::vector<double> b{1.0, 0.0, 0.0, 0.0};
  EXPECT_THROW(mink_inner(a, b), UsageError);
  EXPECT_DOUBLE_EQ(mink_inner(a, a), -1.0);
}

TEST(HPoint, FarPointsStayFiniteAndKeepTheirRadius) {
  // Squared coordinates overflow past radius ~355; the point itself must not.
  for (double r : {100.0, 400.0, 650.0}) {
    Spatial<2> u(0.6, 0.8);
    const auto p = HPoint<2>::from_polar(r, u);
    EXPECT_TRUE(p.coords().allFinite());
    EXPECT_NEAR(p.radius(), r, 1e-12 * r);
    EXPECT_NO_THROW(HPoint<2>::renormalized(p.coords()));
  }
}

TEST(HPoint, RejectsPointsOffTheHyperboloid) {
  EXPECT_THROW(HPoint<2>::from_coords(Ambient<2>(1.0, 1.0, 0.0)), NumericIntegrityError);
  EXPECT_THROW(HPoint<2>::from_coords(Ambient<2>(-1.0, 0.0, 0.0)), NumericIntegrityError);
  EXPECT_NO_THROW(HPoint<2>::from_coords(Ambient<2>(std::cosh(2.0), std::sinh(2.0), 0.0)));
}

TEST(Dist, AnalyticExamples) {
  const auto o = HPoint<2>::origin();
  EXPECT_EQ(dist(o, o), 0.0);
  for (double t : {0.5, 1.0, 10.0}) {
    const auto p = HPoint<2>::from_coords(Ambient<2>(std::cosh(t), std::sinh(t), 0.0));
    EXPECT_NEAR(dist(o, p), t, 1e-12 * std::max(1.0, t)) << "t = " << t;
  }
}

TEST(Dist, SmallDistancesKeepRelativeAccuracy) {
  const auto o = HPoint<3>::origin();
  const auto p = exp_map(o, TangentVector<3>::at_origin(axis<3>(0)), 1e-8);
  EXPECT_LT(std::abs(dist(o, p) - 1e-8) / 1e-8, 1e-4);
}

TEST(ExpMap, AnalyticExamplesAndErrors) {
  const auto o = HPoint<2>::origin();
  const auto e1 = TangentVector<2>::at_origin(axis<2>(0));
  for (double t : {0.0, 0.3, 2.0}) {
    const auto p = exp_map(o, e1, t);
    EXPECT_NEAR(p.coords()[0], std::cosh(t), 1e-12 * std::cosh(t));
    EXPECT_NEAR(p.coords()[1], std::sinh(t), 1e-12 * std::cosh(t));
    EXPECT_EQ(p.coords()[2], 0.0);
  }
  EXPECT_EQ(exp_map(o, e1, 0.0), o);
  const auto not_unit = TangentVector<2>::at_origin(Spatial<2>(2.0, 0.0));
  EXPECT_THROW(exp_map(o, not_unit, 1.0), UsageError);
}

TEST(LogMap, AnalyticExampleSymmetryAndDegenerateInput) {
  const auto o = HPoint<2>::origin();
  const auto q = HPoint<2>::from_coords(Ambient<2>(std::cosh(2.0), std::sinh(2.0), 0.0));
  const auto lg = log_map(o, q);
  EXPECT_NEAR(lg.length, 2.0, 1e-12);
  EXPECT_NEAR((lg.direction.vec - Ambient<2>(0.0, 1.0, 0.0)).norm(), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(log_map(q, o).length, lg.length);
  EXPECT_THROW(log_map(q, q), DegenerateInputError);
}

TEST(ExpLog, RoundTripOnRandomInputs) {
  Rng rng(101);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const auto p = random_point<3>(rng);
    const auto v = random_unit_tangent(p, rng);
    const double t = rng.uniform(1e-3, 5.0);
    const auto q = exp_map(p, v, t);
    const auto lg = log_map(p, q);
    worst = std::max({worst, std::abs(lg.length - t), (lg.direction.vec - v.vec).norm() / p.time()});
    const auto back = exp_map(p, lg.direction, lg.length);
    worst = std::max(worst, dist(back, q));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(ExpLog, ExpOfLogReachesTheTargetForDistantPairs) {
  // Pairs up to 10 apart, so the geodesic between them can pass near the
  // origin while both ends sit at radius ~5.
  Rng rng(102);
  double worst = 0.0;
  for (int k = 0; k < 10'000; ++k) {
    const auto p = random_point<3>(rng, 5.0);
    const auto q = random_point<3>(rng, 5.0);
    const auto lg = log_map(p, q);
    EXPECT_TRUE(lg.direction.is_unit());
    worst = std::max(worst, dist(exp_map(p, lg.direction, lg.length), q));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(BoostTo, ExamplesAndFormPreservation) {
  EXPECT_EQ(boost_to(HPoint<3>::origin()).matrix(), (LorentzMatrix<3>::Identity()));
  const auto p = HPoint<3>::from_coords(Ambient<3>(std::cosh(1.0), std::sinh(1.0), 0.0, 0.0));
  LorentzMatrix<3> expected = LorentzMatrix<3>::Identity();
  expected(0, 0) = expected(1, 1) = std::cosh(1.0);
  expected(0, 1) = expected(1, 0) = std::sinh(1.0);
  EXPECT_LT((boost_to(p).matrix() - expected).cwiseAbs().maxCoeff(), 1e-12);

  Rng rng(7);
  for (int k = 0; k < 500; ++k) {
    const auto q = random_point<3>(rng);
    const auto L = boost_to(q);
    EXPECT_LT(dist(L(HPoint<3>::origin()), q), 1e-9);
    const Ambient<3> u = random_ambient<3>(rng);
    const Ambient<3> v = random_ambient<3>(rng);
    const double ref = mink_inner<3>(u, v);
    const double scale = std::max(1.0, L.matrix().squaredNorm() * u.norm() * v.norm());
    EXPECT_LT(std::abs(mink_inner<3>(L.matrix() * u, L.matrix() * v) - ref), 1e-8 * scale);
    EXPECT_LT((L.matrix() * boost_from(q) - LorentzMatrix<3>::Identity()).cwiseAbs().maxCoeff(),
              1e-9 * L.matrix().squaredNorm());
  }
}

TEST(Isometry, FromMatrixValidates) {
  LorentzMatrix<2> m = LorentzMatrix<2>::Identity();
  m(1, 1) = 2.0;
  EXPECT_THROW(Isometry<2>::from_matrix(m), UsageError);
  LorentzMatrix<2> flip = LorentzMatrix<2>::Identity();
  flip(0, 0) = -1.0;
  EXPECT_THROW(Isometry<2>::from_matrix(flip), UsageError);
}

TEST(RotationFixing, Examples) {
  Rng rng(3);
  const auto p = random_point<3>(rng);
  EXPECT_LT((rotation_fixing<3>(p, OrthogonalMatrix<3>::Identity()).matrix() - LorentzMatrix<3>::Identity())
                .cwiseAbs()
                .maxCoeff(),
            1e-9 * p.time() * p.time());
  for (int k = 0; k < 100; ++k) {
    const auto q = random_point<3>(rng);
    const auto R = rotation_fixing(q, random_rotation<3>(rng));
    EXPECT_LT(dist(R(q), q), 1e-9);
  }
  // Rotation by pi at the origin in d = 2.
  OrthogonalMatrix<2> half_turn;
  half_turn << -1.0, 0.0, 0.0, -1.0;
  const auto x = HPoint<2>::from_coords(Ambient<2>(std::cosh(1.0), std::sinh(1.0), 0.0));
  const auto y = rotation_fixing(HPoint<2>::origin(), half_turn)(x);
  EXPECT_NEAR(y.coords()[0], std::cosh(1.0), 1e-12);
  EXPECT_NEAR(y.coords()[1], -std::sinh(1.0), 1e-12);
  EXPECT_NEAR(y.coords()[2], 0.0, 1e-12);
  OrthogonalMatrix<2> shear;
  shear << 1.0, 1.0, 0.0, 1.0;
  EXPECT_THROW(rotation_fixing(HPoint<2>::origin(), shear), UsageError);
}

TEST(RandomRotation, OrthogonalWithUniformAngleAndBalancedDeterminant) {
  Rng rng(11);
  constexpr int draws = 10'000;
  std::array<int, 20> bins{};
  int reflections = 0;
  for (int k = 0; k < draws; ++k) {
    const auto q = random_rotation<2>(rng);
    ASSERT_TRUE(is_orthogonal<2>(q, 1e-9));
    if (q.determinant() < 0.0) ++reflections;
    double angle = std::atan2(q(1, 0), q(0, 0));
    if (angle < 0.0) angle += 2.0 * std::numbers::pi;
    bins[static_cast<std::size_t>(std::min(19.0, angle / (2.0 * std::numbers::pi) * 20.0))]++;
  }
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - draws / 20.0) * (b - draws / 20.0) / (draws / 20.0);
  EXPECT_LT(chi2, oracle::chi2_19_p001);
  EXPECT_NEAR(static_cast<double>(reflections) / draws, 0.5, 0.02);

  for (int k = 0; k < 100; ++k) EXPECT_TRUE(is_orthogonal<4>(random_rotation<4>(rng), 1e-9));
}

TEST(RandomUnitDirection, UnitUniformAndCentred) {
  Rng rng(5);
  std::array<int, 20> bins{};
  for (int k = 0; k < 10'000; ++k) {
    const auto u = random_unit_direction<2>(rng);
    ASSERT_NEAR(u.norm(), 1.0, 1e-12);
    double angle = std::atan2(u[1], u[0]);
    if (angle < 0.0) angle += 2.0 * std::numbers::pi;
    bins[static_cast<std::size_t>(std::min(19.0, angle / (2.0 * std::numbers::pi) * 20.0))]++;
  }
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - 500.0) * (b - 500.0) / 500.0;
  EXPECT_LT(chi2, oracle::chi2_19_p001);

  Spatial<3> mean = Spatial<3>::Zero();
  for (int k = 0; k < 100'000; ++k) mean += random_unit_direction<3>(rng);
  EXPECT_LT((mean / 1e5).norm(), 0.02);
}

TEST(ParallelTransport, IdentityNormAndRoundTrip) {
  Rng rng(13);
  const auto p0 = random_point<3>(rng);
  const auto v0 = random_unit_tangent(p0, rng);
  const auto same = parallel_transport(p0, p0, v0);
  EXPECT_EQ(same.vec, v0.vec);

  const auto o = HPoint<3>::origin();
  for (int k = 0; k < 1000; ++k) {
    const auto p = random_point<3>(rng);
    const auto q = random_point<3>(rng);
    TangentVector<3> v = random_unit_tangent(p, rng);
    v.vec *= rng.uniform(0.1, 3.0);
    const auto w = parallel_transport(p, q, v);
    const double scale = std::max(1.0, w.vec.squaredNorm());
    EXPECT_LT(std::abs(w.norm_squared() - v.norm_squared()), 1e-9 * scale);
    EXPECT_LT(std::abs(mink_inner<3>(w.vec, q.coords())), 1e-9 * scale * q.time());

    const auto u = TangentVector<3>::at_origin(random_unit_direction<3>(rng));
    const auto there = parallel_transport(o, p, u);
    const auto back = parallel_transport(p, o, there);
    EXPECT_LT((back.vec - u.vec).norm(), 1e-8);
  }
}

TEST(ParallelTransport, CarriesTheGeodesicVelocity) {
  Rng rng(17);
  for (int k = 0; k < 200; ++k) {
    const auto p = random_point<2>(rng);
    const auto v = random_unit_tangent(p, rng);
    const double t = rng.uniform(0.1, 3.0);
    const auto q = exp_map(p, v, t);
    const auto moved = parallel_transport(p, q, v);
    // The velocity of the geodesic at q is sinh t p + cosh t v.
    const Ambient<2> velocity = std::sinh(t) * p.coords() + std::cosh(t) * v.vec;
    EXPECT_LT((moved.vec - velocity).norm(), 1e-9 * velocity.norm());
  }
}

TEST(Klein, ExamplesRoundTripAndErrors) {
  EXPECT_EQ(klein_project(HPoint<2>::origin()).coords, Spatial<2>::Zero());
  const auto p = HPoint<2>::from_coords(Ambient<2>(std::cosh(1.0), std::sinh(1.0), 0.0));
  EXPECT_NEAR(klein_project(p).coords[0], 0.7615942, 1e-7);
  EXPECT_NEAR(klein_project(p).coords[1], 0.0, 1e-15);
  EXPECT_THROW(klein_lift(KleinPoint<2>{Spatial<2>(1.0, 0.0)}), UsageError);

  Rng rng(19);
  for (int k = 0; k < 1000; ++k) {
    const auto q = random_point<3>(rng);
    const auto back = klein_lift(klein_project(q));
    EXPECT_LT((back.coords() - q.coords()).norm(), 1e-9 * q.time() * q.time());
    EXPECT_LT(klein_project(q).coords.norm(), 1.0);
  }
}

TEST(Klein, GeodesicsProjectToChords) {
  Rng rng(23);
  for (int k = 0; k < 1000; ++k) {
    const auto a = random_point<3>(rng);
    const auto b = random_point<3>(rng);
    const Spatial<3> ka = klein_project(a).coords;
    const Spatial<3> kb = klein_project(b).coords;
    const Spatial<3> km = klein_project(geodesic_point(a, b, rng.uniform())).coords;
    // Distance from km to the chord line through ka, kb.
    const Spatial<3> dir = (kb - ka).normalized();
    const Spatial<3> off = (km - ka) - (km - ka).dot(dir) * dir;
    EXPECT_LT(off.norm(), 1e-8);
  }
}

TEST(Metric, TriangleInequalityAndIsometryInvariance) {
  Rng rng(29);
  for (int k = 0; k < 10'000; ++k) {
    const auto p = random_point<2>(rng, 5.0);
    const auto q = random_point<2>(rng, 5.0);
    const auto r = random_point<2>(rng, 5.0);
    ASSERT_LE(dist(p, r), dist(p, q) + dist(q, r) + 1e-9);
  }
  for (int k = 0; k < 1000; ++k) {
    const auto L = random_isometry<3>(rng);
    const auto p = random_point<3>(rng);
    const auto q = random_point<3>(rng);
    EXPECT_NEAR(dist(L(p), L(q)), dist(p, q), 1e-8);
  }
}

TEST(DistToGeodesic, AnalyticExamples) {
  const auto o = HPoint<2>::origin();
  const auto a = HPoint<2>::from_polar(1.0, axis<2>(0));
  const auto b = HPoint<2>::from_polar(2.0, axis<2>(0));
  for (double s : {0.3, 1.0, 4.0}) {
    const auto p = HPoint<2>::from_polar(s, axis<2>(1));
    EXPECT_NEAR(dist_to_geodesic_line(p, a, b), s, 1e-12 * std::max(1.0, s));
  }
  const auto on_line = HPoint<2>::from_polar(3.5, -axis<2>(0));
  EXPECT_NEAR(dist_to_geodesic_line(on_line, a, b), 0.0, 1e-9);
  EXPECT_THROW(dist_to_geodesic_line(o, a, a), DegenerateInputError);
}

TEST(DistToGeodesic, ClosedFormMatchesSearchOracle) {
  Rng rng(31);
  for (int k = 0; k < 300; ++k) {
    const auto p = random_point<3>(rng);
    const auto a = random_point<3>(rng);
    const auto b = random_point<3>(rng);
    EXPECT_NEAR(dist_to_geodesic_line(p, a, b), dist_to_geodesic_line_search(p, a, b), 1e-6);
    EXPECT_NEAR(dist_to_geodesic_segment(p, a, b), dist_to_geodesic_segment_search(p, a, b), 1e-6);
  }
}

TEST(DistToGeodesicSegment, EndpointInteriorAndDegenerateCases) {
  Rng rng(37);
  for (int k = 0; k < 300; ++k) {
    const auto a = random_point<2>(rng);
    const auto b = random_point<2>(rng);
    EXPECT_NEAR(dist_to_geodesic_segment(a, a, b), 0.0, 1e-9);
    // Interior foot: push the segment midpoint off the geodesic orthogonally.
    const auto mid = geodesic_point(a, b, 0.5);
    const auto t = log_map(mid, b).direction;
    Ambient<2> normal = Ambient<2>::Zero();
    {
      // Orthogonal unit tangent at mid: the Minkowski cross product of mid and t.
      const Ambient<2>& m = mid.coords();
      const Ambient<2>& v = t.vec;
      normal[0] = -(m[1] * v[2] - m[2] * v[1]);
      normal[1] = m[2] * v[0] - m[0] * v[2];
      normal[2] = m[0] * v[1] - m[1] * v[0];
      normal /= std::sqrt(mink_inner<2>(normal, normal));
    }
    const auto p = geodesic_at<2>(mid, normal, 0.7);
    EXPECT_NEAR(dist_to_geodesic_segment(p, a, b), dist_to_geodesic_line(p, a, b), 1e-8);
    EXPECT_NEAR(dist_to_geodesic_segment(p, a, b), 0.7, 1e-8);
    // Beyond b: leave b at 45 degrees between the outward tangent and the normal.
    const Ambient<2> out_t = parallel_transport(mid, b, t).vec;
    const Ambient<2> out_n = parallel_transport(mid, b, TangentVector<2>{mid, normal}).vec;
    const auto beyond = geodesic_at<2>(b, (out_t + out_n) / std::sqrt(2.0), 1.0);
    EXPECT_NEAR(dist_to_geodesic_segment(beyond, a, b), dist(beyond, b), 1e-8);
  }
  const auto a = HPoint<2>::from_polar(1.0, axis<2>(0));
  const auto p = HPoint<2>::from_polar(2.0, axis<2>(1));
  EXPECT_NEAR(dist_to_geodesic_segment(p, a, a), dist(p, a), 1e-15);
}
