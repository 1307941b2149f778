#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "geolab/surface.hpp"

using namespace geolab;

namespace {

Vec3 mk_point(double k, double mu, double theta, double z) {
  const double r = std::sqrt(1.0 - std::pow(std::abs(z), 2.0 * mu) / k);
  return {r * std::cos(theta), r * std::sin(theta), z};
}

class ConstantFactor final : public ConformalFactor {
 public:
  explicit ConstantFactor(double c) : c_(c) {}
  double value(const Vec3&) const override { return c_; }

 private:
  double c_;
};

class QuadraticFactor final : public ConformalFactor {
 public:
  double value(const Vec3& x) const override { return 0.1 * (x.x * x.x + x.y * x.y); }
};

// Chart metric sampled from metric_at on a Monge patch of a level set;
// derivatives by central differences of the samples.
class MongePatchMetric final : public ChartMetric {
 public:
  MongePatchMetric(const Surface& s, Vec3 base) : s_(s), base_(base) {
    const auto t = metric_at(s, base);
    a_ = t.patch_axes[0];
    b_ = t.patch_axes[1];
    c_ = 3 - a_ - b_;
  }
  Vec3 lift(double u, double v) const {
    Vec3 p = base_;
    p[a_] = u;
    p[b_] = v;
    const auto& fn = s_.level_set_function();
    for (int it = 0; it < 60; ++it) p[c_] -= fn.value(p) / fn.gradient(p)[c_];
    return p;
  }
  Mat2 g(double u, double v) const { return metric_at(s_, lift(u, v)).components; }
  ChartMetricSample evaluate(double u, double v) const override {
    constexpr double h = 1e-4;
    const Mat2 m = g(u, v), up = g(u + h, v), um = g(u - h, v), vp = g(u, v + h), vm = g(u, v - h);
    ChartMetricSample s;
    s.E = m.a11;
    s.F = m.a12;
    s.G = m.a22;
    s.E_u = (up.a11 - um.a11) / (2 * h);
    s.F_u = (up.a12 - um.a12) / (2 * h);
    s.G_u = (up.a22 - um.a22) / (2 * h);
    s.E_v = (vp.a11 - vm.a11) / (2 * h);
    s.F_v = (vp.a12 - vm.a12) / (2 * h);
    s.G_v = (vp.a22 - vm.a22) / (2 * h);
    return s;
  }
  int a_, b_, c_;

 private:
  const Surface& s_;
  Vec3 base_;
};

}  // namespace

TEST(MetricAt, FlatChartIsIdentity) {
  const Surface s = make_flat_chart();
  const auto t = metric_at(s, {0.3, -0.7, 0.0});
  EXPECT_EQ(t.components.a11, 1.0);
  EXPECT_EQ(t.components.a12, 0.0);
  EXPECT_EQ(t.components.a22, 1.0);
}

TEST(MetricAt, CylinderIsIdentityInTangentFrame) {
  const auto t = metric_at(make_cylinder(), {1.0, 0.0, 0.0});
  EXPECT_NEAR(t.components.a11, 1.0, 1e-15);
  EXPECT_NEAR(t.components.a12, 0.0, 1e-15);
  EXPECT_NEAR(t.components.a22, 1.0, 1e-15);
}

TEST(MetricAt, MkNorthPoleMatchesGraphParametrization) {
  // Oracle: x3 = 2 sqrt(1 - x1^2 - x2^2) over the (x1, x2) plane, partials by differences.
  const Surface s = make_mk(4.0, 1.0);
  const auto t = metric_at(s, {0.0, 0.0, 2.0});
  EXPECT_GT(t.components.det(), 0.0);
  auto X = [](double a, double b) { return Vec3{a, b, 2.0 * std::sqrt(1.0 - a * a - b * b)}; };
  const double h = 1e-6;
  const Vec3 xa = (X(h, 0) - X(-h, 0)) / (2 * h);
  const Vec3 xb = (X(0, h) - X(0, -h)) / (2 * h);
  EXPECT_NEAR(t.components.a11, dot(xa, xa), 1e-9);
  EXPECT_NEAR(t.components.a12, dot(xa, xb), 1e-9);
  EXPECT_NEAR(t.components.a22, dot(xb, xb), 1e-9);

  const Vec3 q = mk_point(4.0, 1.0, 0.4, 1.9);
  const auto tq = metric_at(s, q);
  ASSERT_EQ(tq.patch_axes[0], 0);
  ASSERT_EQ(tq.patch_axes[1], 1);
  auto Y = [](double a, double b) { return Vec3{a, b, 2.0 * std::sqrt(1.0 - a * a - b * b)}; };
  const Vec3 ya = (Y(q.x + h, q.y) - Y(q.x - h, q.y)) / (2 * h);
  const Vec3 yb = (Y(q.x, q.y + h) - Y(q.x, q.y - h)) / (2 * h);
  EXPECT_NEAR(tq.components.a11, dot(ya, ya), 1e-8);
  EXPECT_NEAR(tq.components.a12, dot(ya, yb), 1e-8);
  EXPECT_NEAR(tq.components.a22, dot(yb, yb), 1e-8);
}

TEST(MetricAt, SpdAtRandomPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(0.0, kTwoPi), zz(-0.999, 0.999);
  for (double mu : {1.0, 2.0}) {
    const Surface s = make_mk(9.0, mu);
    const double zmax = std::pow(9.0, 0.5 / mu);
    for (int i = 0; i < 500; ++i) {
      const Vec3 p = mk_point(9.0, mu, th(rng), zz(rng) * zmax);
      const auto ev = metric_at(s, p).components.eigenvalues();
      EXPECT_GT(ev[0], 0.0);
    }
  }
  const Surface g = make_gnomonic_sphere_chart();
  for (int i = 0; i < 200; ++i) {
    std::uniform_real_distribution<double> uv(-2.0, 2.0);
    EXPECT_GT(metric_at(g, {uv(rng), uv(rng), 0.0}).components.eigenvalues()[0], 0.0);
  }
}

TEST(MetricAt, OffSurfaceThrows) {
  try {
    metric_at(make_sphere(), {1.0, 1e-4, 0.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PointOffSurface);
  }
  EXPECT_THROW(metric_at(make_flat_chart(), {5.0, 0.0, 0.0}), Error);
}

TEST(GaussCurvature, MkEquatorIsInverseK) {
  for (double k : {2.0, 4.0, 10.0}) {
    const Surface s = make_mk(k, 1.0);
    for (int i = 0; i < 64; ++i) {
      const double t = kTwoPi * i / 64.0;
      EXPECT_NEAR(gauss_curvature(s, {std::cos(t), std::sin(t), 0.0}), 1.0 / k, 1e-12);
    }
  }
}

TEST(GaussCurvature, RoundSphereIsOne) {
  const Surface s = make_sphere();
  EXPECT_NEAR(gauss_curvature(s, normalized(Vec3{0.3, -0.2, 0.9})), 1.0, 1e-14);
  EXPECT_NEAR(gauss_curvature(make_ellipsoid(1, 1, 1), {0, 0, 1}), 1.0, 1e-14);
}

TEST(GaussCurvature, MuTwoFlatOnEquatorNonNegativeElsewhere) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> th(0.0, kTwoPi), zz(-0.999, 0.999);
  for (double k : {1.0, 9.0, 100.0}) {
    const Surface s = make_mk(k, 2.0);
    EXPECT_EQ(gauss_curvature(s, {0.0, 1.0, 0.0}), 0.0);
    EXPECT_EQ(gauss_curvature(s, {std::cos(1.0), std::sin(1.0), 0.0}), 0.0);
    for (int i = 0; i < 1000; ++i) {
      const Vec3 p = mk_point(k, 2.0, th(rng), zz(rng) * std::pow(k, 0.25));
      EXPECT_GE(gauss_curvature(s, p), -1e-9);
    }
  }
}

TEST(GaussCurvature, MuOnePositiveAtRandomSamples) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> th(0.0, kTwoPi), zz(-1.0, 1.0);
  const Surface s = make_mk(4.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_GT(gauss_curvature(s, mk_point(4.0, 1.0, th(rng), 2.0 * zz(rng))), 0.0);
  }
  // pole of the spheroid with semi-axes (1, 1, 2): K = c^2 / a^4 = 4
  EXPECT_NEAR(gauss_curvature(s, {0, 0, 2}), 4.0, 1e-12);
}

TEST(GaussCurvature, LevelSetAgreesWithMetricSampleEstimate) {
  // Second-order agreement: the metric-sample oracle uses h = 1e-4 differences.
  const Surface s = make_mk(4.0, 1.0);
  for (const Vec3& base : {mk_point(4.0, 1.0, 0.3, 0.5), mk_point(4.0, 1.0, 2.0, -1.5),
                           mk_point(4.0, 1.0, 4.0, 1.9)}) {
    auto patch = std::make_shared<MongePatchMetric>(s, base);
    const Surface chart = Surface::chart(patch, ChartDomain{-10, 10, -10, 10, false, false}, "patch");
    const double u = base[patch->a_], v = base[patch->b_];
    EXPECT_NEAR(gauss_curvature(chart, {u, v, 0.0}), gauss_curvature(s, base), 1e-5);
  }
  const Surface e = make_ellipsoid(0.96, 1.0, 1.04);
  const Vec3 p = e.project({0.4, 0.5, 0.7});
  auto patch = std::make_shared<MongePatchMetric>(e, p);
  const Surface chart = Surface::chart(patch, ChartDomain{-10, 10, -10, 10, false, false}, "patch");
  EXPECT_NEAR(gauss_curvature(chart, {p[patch->a_], p[patch->b_], 0.0}), gauss_curvature(e, p), 1e-5);
}

TEST(GaussCurvature, ChartsOfTheUnitSphere) {
  const Surface polar = make_sphere_polar_chart();
  const Surface gno = make_gnomonic_sphere_chart();
  for (double v : {0.3, 0.8, 1.5, 2.7}) EXPECT_NEAR(gauss_curvature(polar, {1.0, v, 0.0}), 1.0, 1e-9);
  for (double u : {-1.5, 0.0, 0.4}) EXPECT_NEAR(gauss_curvature(gno, {u, 0.7 + 0.5 * u, 0.0}), 1.0, 1e-9);
}

TEST(GaussCurvature, ConformalFlatChart) {
  // h = e^{2f} delta with f = 0.1 (u^2 + v^2): K = -e^{-2f} Lap f = -0.4 e^{-2f}
  const Surface s = make_flat_chart().with_conformal_factor(std::make_shared<QuadraticFactor>());
  for (const Vec3& p : {Vec3{0, 0, 0}, Vec3{0.5, -1.0, 0}, Vec3{1.2, 0.3, 0}}) {
    const double f = 0.1 * (p.x * p.x + p.y * p.y);
    EXPECT_NEAR(gauss_curvature(s, p), -0.4 * std::exp(-2 * f), 1e-6);
  }
  // Same metric through the sphere-polar route: f constant leaves K scaled by e^{-2c}.
  const Surface sc = make_sphere_polar_chart().with_conformal_factor(std::make_shared<ConstantFactor>(0.3));
  EXPECT_NEAR(gauss_curvature(sc, {0.0, 1.0, 0.0}), std::exp(-0.6), 1e-8);
}

TEST(GaussCurvature, ConformalFactorRejectedOnLevelSets) {
  EXPECT_THROW(make_sphere().with_conformal_factor(std::make_shared<ConstantFactor>(1.0)), Error);
}

TEST(Christoffel, FlatChartVanishes) {
  const Christoffel G = christoffel(make_flat_chart(), {0.2, 0.1, 0});
  for (double g : G.g) EXPECT_EQ(g, 0.0);
}

TEST(Christoffel, SpherePolarAtQuarterPi) {
  const Christoffel G = christoffel(make_sphere_polar_chart(), {0.7, kPi / 4, 0});
  // index 0 = theta, 1 = phi
  EXPECT_NEAR(G(1, 0, 0), -0.5, 1e-15);
  EXPECT_NEAR(G(0, 0, 1), 1.0, 1e-15);  // cot(pi/4)
  EXPECT_NEAR(G(0, 1, 0), 1.0, 1e-15);
  EXPECT_NEAR(G(1, 1, 1), 0.0, 1e-15);
  EXPECT_NEAR(G(0, 0, 0), 0.0, 1e-15);
}

TEST(Christoffel, GnomonicMatchesMetricDifferences) {
  // Oracle: Christoffel symbols of the first kind from differenced metric samples.
  const Surface s = make_gnomonic_sphere_chart();
  const Vec3 p{0.4, -0.9, 0};
  const double h = 1e-5;
  auto g = [&](double u, double v) { return s.chart_metric_matrix({u, v, 0}); };
  auto gij = [](const Mat2& m, int i, int j) { return i + j == 0 ? m.a11 : (i + j == 1 ? m.a12 : m.a22); };
  double dg[2][2][2];
  for (int d = 0; d < 2; ++d) {
    const Mat2 plus = d == 0 ? g(p.x + h, p.y) : g(p.x, p.y + h);
    const Mat2 minus = d == 0 ? g(p.x - h, p.y) : g(p.x, p.y - h);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) dg[d][i][j] = (gij(plus, i, j) - gij(minus, i, j)) / (2 * h);
  }
  const Mat2 gi = g(p.x, p.y).inverse();
  const Christoffel G = christoffel(s, p);
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double v = 0;
        for (int d = 0; d < 2; ++d) v += 0.5 * gij(gi, c, d) * (dg[a][d][b] + dg[b][d][a] - dg[d][a][b]);
        EXPECT_NEAR(G(c, a, b), v, 1e-8);
      }
}

TEST(Christoffel, ConstantConformalFactorLeavesFlatSymbolsZero) {
  const Surface s = make_flat_chart().with_conformal_factor(std::make_shared<ConstantFactor>(0.7));
  const Christoffel G = christoffel(s, {0.5, 0.5, 0});
  for (double g : G.g) EXPECT_NEAR(g, 0.0, 1e-9);
  EXPECT_THROW(christoffel(make_sphere(), {1, 0, 0}), Error);
}

TEST(ConformalCurvature, Examples) {
  EXPECT_EQ(conformal_geodesic_curvature(0.7, 0.0, 0.0), 0.7);
  EXPECT_NEAR(conformal_geodesic_curvature(0.7, 0.0, 0.4), std::exp(-0.4) * 0.7, 1e-15);
  EXPECT_EQ(conformal_geodesic_curvature(0.7, -0.7, 3.0), 0.0);
}

TEST(SurfaceOps, ProjectionAndRotation) {
  const Surface s = make_mk(4.0, 2.0);
  const Vec3 p = s.project({0.9, 0.3, 1.1});
  EXPECT_LE(std::abs(s.level_value(p)), 1e-14);
  const Vec3 v = normalized(s.tangent_project(p, {0.2, -1.0, 0.3}));
  const Vec3 w = s.rotate_quarter(p, v);
  EXPECT_NEAR(dot(v, w), 0.0, 1e-15);
  EXPECT_NEAR(norm(w), 1.0, 1e-15);
  EXPECT_NEAR(dot(w, s.unit_normal(p)), 0.0, 1e-15);

  const Surface g = make_gnomonic_sphere_chart();
  const Vec3 q{0.3, 0.6, 0};
  const Vec3 a{0.7, -0.2, 0};
  const Vec3 b = g.rotate_quarter(q, a);
  EXPECT_NEAR(g.inner(q, a, b), 0.0, 1e-15);
  EXPECT_NEAR(g.inner(q, b, b), g.inner(q, a, a), 1e-15);
  EXPECT_GT(a.x * b.y - a.y * b.x, 0.0);
}
