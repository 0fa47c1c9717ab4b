#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gdix/errors.hpp"
#include "gdix/jacobi.hpp"
#include "gdix/ode.hpp"

using namespace gdix;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

MetricField lens(double amplitude = 0.3, int dim = 2) {
  ConformalParams p;
  p.c0 = 1.0;
  p.amplitude = amplitude;
  return make_conformal(dim, p);
}

GeodesicPath equator(double r_max, double dr) {
  return shoot_geodesic(make_constant_curvature(2, 1.0), vec2(std::numbers::pi / 2, 0.0),
                        vec2(0.0, 1.0), r_max, dr);
}

// Gaussian curvature of g = c^{-2}δ from K = c² Δ log c, by central
// differences; independent of the tensor code.
double lens_gaussian_curvature(double amplitude, const Vec& x) {
  auto logc = [&](double a, double b) {
    return std::log(1.0 + amplitude * std::exp(-(a * a + b * b)));
  };
  const double h = 1e-3;
  const double lap = (logc(x[0] + h, x[1]) + logc(x[0] - h, x[1]) + logc(x[0], x[1] + h) +
                      logc(x[0], x[1] - h) - 4 * logc(x[0], x[1])) /
                     (h * h);
  const double c = std::exp(logc(x[0], x[1]));
  return c * c * lap;
}

}  // namespace

TEST(PointSource, EuclideanLinear) {
  const MetricField m = make_euclidean(3);
  const GeodesicPath p = shoot_geodesic(m, vec3(0, 0, 0), vec3(0, 0.6, 0.8), 2.0, 0.01);
  const JacobiMatrix jm = point_source_jacobi(m, p, 1.5);
  for (std::size_t k = 0; k < jm.r.size(); ++k) {
    EXPECT_NEAR((jm.j[k] - (1.5 - jm.r[k]) * Mat::Identity(2, 2)).norm(), 0.0, 1e-13);
    EXPECT_NEAR((jm.dj[k] + Mat::Identity(2, 2)).norm(), 0.0, 1e-13);
  }
}

TEST(PointSource, SphereSine) {
  const MetricField m = make_constant_curvature(2, 1.0);
  const GeodesicPath p = equator(3.0, 0.01);
  const JacobiMatrix jm = point_source_jacobi(m, p, 2.0);
  for (std::size_t k = 0; k < jm.r.size(); ++k) {
    EXPECT_NEAR(jm.j[k](0, 0), std::sin(2.0 - jm.r[k]), 1e-9);
    EXPECT_NEAR(jm.dj[k](0, 0), -std::cos(2.0 - jm.r[k]), 1e-9);
  }
}

TEST(PointSource, OffGridCentre) {
  const MetricField m = make_constant_curvature(2, 1.0);
  const GeodesicPath p = equator(3.0, 0.01);
  const JacobiMatrix jm = point_source_jacobi(m, p, 2.0037);
  EXPECT_NEAR(jm.j[100](0, 0), std::sin(2.0037 - 1.0), 1e-9);
}

TEST(PointSource, ConformalResidual) {
  const MetricField m = lens();
  const Vec x = vec2(-2.0, 0.3);
  const GeodesicPath p = shoot_geodesic(m, x, vec2(1.0 / std::sqrt(m.eval(x)(0, 0)), 0), 4.0,
                                        0.002);
  const JacobiMatrix jm = point_source_jacobi(m, p, 3.0);
  const auto R = curvature_coeffs(m, p);
  const double h = p.dr();
  double worst = 0.0;
  // Numerov form of the discretized equation, residual O(h^4)
  for (std::size_t k = 1; k + 1 < jm.r.size(); ++k) {
    const Mat res = (jm.j[k + 1] - 2.0 * jm.j[k] + jm.j[k - 1]) / (h * h) +
                    (R[k + 1] * jm.j[k + 1] + 10.0 * R[k] * jm.j[k] + R[k - 1] * jm.j[k - 1]) / 12.0;
    worst = std::max(worst, res.norm());
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(ShapeFromJacobi, ClosedForms) {
  {
    const MetricField m = make_euclidean(2);
    const GeodesicPath p = shoot_geodesic(m, vec2(0, 0), vec2(1, 0), 2.0, 0.01);
    const JacobiMatrix jm = point_source_jacobi(m, p, 1.7);
    const ShapeData sd = shape_from_jacobi(jm, 0.5);
    EXPECT_NEAR(sd.S(0, 0), 1.0 / 1.2, 1e-12);
  }
  {
    const MetricField m = make_constant_curvature(2, 1.0);
    const GeodesicPath p = equator(4.0, 0.005);
    const JacobiMatrix jm = point_source_jacobi(m, p, 3.8);
    for (double r : {0.7, 1.0, 2.23, 3.5}) {
      const ShapeData sd = shape_from_jacobi(jm, r);
      EXPECT_NEAR(sd.S(0, 0), 1.0 / std::tan(3.8 - r), 1e-7 * (1 + std::abs(sd.S(0, 0))));
    }
    // S vanishes where t - r = π/2
    EXPECT_NEAR(shape_from_jacobi(jm, 3.8 - std::numbers::pi / 2).S(0, 0), 0.0, 1e-8);
  }
  {
    const MetricField m = make_constant_curvature(2, -1.0);
    const GeodesicPath p = shoot_geodesic(m, vec2(0.5, 0.0), vec2(1, 0), 3.0, 0.01);
    const JacobiMatrix jm = point_source_jacobi(m, p, 2.5);
    for (double r : {0.0, 1.0, 2.0}) {
      EXPECT_NEAR(shape_from_jacobi(jm, r).S(0, 0), 1.0 / std::tanh(2.5 - r), 1e-8);
    }
  }
}

TEST(ShapeFromJacobi, ConjugatePointRaises) {
  const MetricField m = make_constant_curvature(2, 1.0);
  const GeodesicPath p = equator(4.0, 0.01);
  const JacobiMatrix jm = point_source_jacobi(m, p, 4.0);
  try {
    shape_from_jacobi(jm, 4.0 - std::numbers::pi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConjugatePoint);
  }
}

TEST(ShapeFromJacobi, NormalizationIndependence) {
  const MetricField m = lens(0.3, 3);
  const Vec x = vec3(-2.0, 0.2, 0.1);
  Vec d = vec3(1, 0.1, -0.1);
  d /= std::sqrt(d.dot(m.eval(x) * d));
  const GeodesicPath p = shoot_geodesic(m, x, d, 3.0, 0.01);
  const JacobiMatrix jm = point_source_jacobi(m, p, 2.5);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    Mat C(2, 2);
    C << nd(rng), nd(rng), nd(rng), nd(rng);
    if (std::abs(C.determinant()) < 0.1) continue;
    const double r = 0.3 * trial;
    const Mat j = jm.j_at(r), dj = jm.dj_at(r);
    const ShapeData a = shape_from_pair(j, dj, r, 2.5);
    const ShapeData b = shape_from_pair(j * C, dj * C, r, 2.5);
    EXPECT_LT((a.S - b.S).norm(), 1e-10 * (1 + a.S.norm()));
  }
}

TEST(ConjugatePoints, EuclideanNone) {
  const MetricField m = make_euclidean(2);
  const GeodesicPath p = shoot_geodesic(m, vec2(0, 0), vec2(1, 0), 4.0, 0.01);
  EXPECT_TRUE(conjugate_points(point_source_jacobi(m, p, 4.0)).empty());
}

TEST(ConjugatePoints, SphereAtDistancePi) {
  const MetricField m = make_constant_curvature(2, 1.0);
  const GeodesicPath p = equator(4.0, 0.01);
  const auto roots = conjugate_points(point_source_jacobi(m, p, 4.0));
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(roots[0], 4.0 - std::numbers::pi, 1e-3);
}

TEST(ConjugatePoints, ThreeSphereDoubleZero) {
  const MetricField m = make_constant_curvature(3, 1.0);
  const GeodesicPath p = shoot_geodesic(m, vec3(std::numbers::pi / 2, std::numbers::pi / 2, 0),
                                        vec3(0, 0, 1), 4.0, 0.01);
  const auto roots = conjugate_points(point_source_jacobi(m, p, 4.0));
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(roots[0], 4.0 - std::numbers::pi, 1e-3);
}

TEST(ConjugatePoints, LensMatchesScalarOracle) {
  const double A = -0.4;
  const MetricField m = lens(A);
  const Vec x = vec2(-2.0, 0.05);
  const double c = 1.0 + A * std::exp(-x.squaredNorm());
  const double tc = 6.0;
  const GeodesicPath p = shoot_geodesic(m, x, vec2(c, 0), tc, 0.005);
  const auto roots = conjugate_points(point_source_jacobi(m, p, tc));
  ASSERT_FALSE(roots.empty());

  // scalar Jacobi equation with the independently computed Gaussian curvature
  Rhs f = [&](double r, const State& y, State& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -lens_gaussian_curvature(A, p.point_at(r)) * y[0];
  };
  State y(2);
  y << 0.0, -1.0;
  std::vector<double> oracle;
  double prev = 0.0;
  const double h = 0.01;
  for (double r = tc - h; r > -1e-12; r -= h) {
    y = integrate_dopri5(f, y, r + h, r);
    if (r < tc - 0.05 && prev != 0.0 && (y[0] < 0) != (prev < 0)) oracle.push_back(r + 0.5 * h);
    prev = y[0];
  }
  ASSERT_EQ(oracle.size(), roots.size());
  std::sort(oracle.begin(), oracle.end());
  for (std::size_t i = 0; i < roots.size(); ++i) EXPECT_NEAR(roots[i], oracle[i], 0.01);
}

TEST(Riccati, EuclideanHyperbola) {
  const MetricField m = make_euclidean(2);
  const GeodesicPath p = shoot_geodesic(m, vec2(0, 0), vec2(1, 0), 2.0, 0.01);
  const auto out = riccati_march(m, p, Mat::Constant(1, 1, 1.0 / 2.5), 0.0, 1.5, 2.5);
  for (const ShapeData& sd : out) EXPECT_NEAR(sd.S(0, 0), 1.0 / (2.5 - sd.r), 1e-9);
}

TEST(Riccati, SphereCotangent) {
  const MetricField m = make_constant_curvature(2, 1.0);
  const GeodesicPath p = equator(2.0, 0.005);
  // start at t - r0 = 0.3 with t = 1.5, march backwards to t - r = 1.2
  const double t = 1.5;
  const auto out = riccati_march(m, p, Mat::Constant(1, 1, 1.0 / std::tan(0.3)), 1.2, 0.3, t);
  EXPECT_NEAR(out.back().r, 0.3, 1e-12);
  EXPECT_NEAR(out.back().S(0, 0), 1.0 / std::tan(1.2), 1e-7);
}

TEST(Riccati, MatchesJacobiOnLens) {
  const MetricField m = lens(0.3, 3);
  const Vec x = vec3(-2.0, 0.2, 0.1);
  Vec d = vec3(1, 0.1, -0.1);
  d /= std::sqrt(d.dot(m.eval(x) * d));
  const GeodesicPath p = shoot_geodesic(m, x, d, 3.0, 0.005);
  const double t = 3.0;
  const JacobiMatrix jm = point_source_jacobi(m, p, t);
  const double r0 = 2.5;
  const auto out = riccati_march(m, p, shape_from_jacobi(jm, r0).S, r0, 0.0, t);
  for (const ShapeData& sd : out) {
    const Mat Sj = shape_from_jacobi(jm, sd.r).S;
    EXPECT_LT((sd.S - Sj).norm(), 1e-6 * (1 + Sj.norm()));
  }
}

TEST(Riccati, BlowUpReported) {
  const MetricField m = make_constant_curvature(2, 1.0);
  const GeodesicPath p = equator(4.0, 0.01);
  try {
    riccati_march(m, p, Mat::Constant(1, 1, 1.0 / std::tan(0.5)), 3.5, 0.0, 4.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BlowUp);
  }
}
