#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "geolab/jacobi.hpp"

using namespace geolab;

namespace {

GeodesicCurve equator(const Surface& s, int n = 2048) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) pts.push_back({std::cos(kTwoPi * i / n), std::sin(kTwoPi * i / n), 0.0});
  return make_curve(s, pts, true);
}

GeodesicCurve great_circle(const Vec3& a, const Vec3& b, int n = 2048) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) {
    const double t = kTwoPi * i / n;
    pts.push_back(std::cos(t) * a + std::sin(t) * b);
  }
  return make_curve(make_sphere(), pts, true);
}

// Analytic spectrum of -phi'' - K phi on a circle of length P: (2 pi j / P)^2 - K,
// j = 0 once and j >= 1 twice.
std::vector<double> analytic(double P, double K, int count) {
  std::vector<double> v;
  for (int j = 0; static_cast<int>(v.size()) < count; ++j) {
    const double w = kTwoPi * j / P;
    v.push_back(w * w - K);
    if (j > 0) v.push_back(w * w - K);
  }
  v.resize(count);
  return v;
}

}  // namespace

TEST(SecondVariation, EquatorConstantField) {
  const double k = 4.0, c = 0.7;
  const Surface s = make_mk(k);
  const auto g = equator(s);
  std::vector<double> phi(g.samples.size(), c);
  EXPECT_NEAR(second_variation(g, phi, phi, s), -kTwoPi * c * c / k, 1e-10);
}

TEST(SecondVariation, EquatorSineModes) {
  const double k = 4.0;
  const Surface s = make_mk(k);
  const auto g = equator(s);
  for (int n : {1, 2, 5}) {
    std::vector<double> phi(g.samples.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = std::sin(n * kTwoPi * i / phi.size());
    EXPECT_NEAR(second_variation(g, phi, phi, s), kPi * (n * n - 1.0 / k), 1e-8 * std::pow(n, 6));
  }
}

TEST(SecondVariation, CylinderCircleAndCover) {
  const Surface s = make_cylinder();
  const auto g = equator(s, 512);
  std::vector<double> one(512, 1.0);
  EXPECT_NEAR(second_variation(g, one, one, s), 0.0, 1e-14);
  std::vector<double> cover(1024, 1.0);
  EXPECT_NEAR(second_variation(g, cover, cover, s), 0.0, 1e-14);
  std::vector<double> bad(500, 1.0);
  EXPECT_THROW(second_variation(g, bad, bad, s), Error);
}

TEST(SecondVariation, RejectsNonGeodesic) {
  const Surface s = make_mk(4.0);
  std::vector<Vec3> pts;
  const double c = 1.0, r = std::sqrt(1.0 - c * c / 4.0);
  for (int i = 0; i < 512; ++i) pts.push_back({r * std::cos(kTwoPi * i / 512), r * std::sin(kTwoPi * i / 512), c});
  const auto circle = make_curve(s, pts, true);
  std::vector<double> one(512, 1.0);
  try {
    second_variation(circle, one, one, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotAGeodesic);
  }
  EXPECT_THROW(jacobi_spectrum(circle, s, 1, 1024), Error);
}

TEST(JacobiSpectrum, MkEquatorAnalytic) {
  for (double k : {4.0, 16.0}) {
    const Surface s = make_mk(k);
    const auto g = equator(s);
    const auto r = jacobi_spectrum(g, s, 1, 1024);
    const double h = r.period / r.grid_size;
    const auto ref = analytic(r.period, 1.0 / k, 6);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(r.eigenvalues[i], ref[i], 5 * h * h) << k << ' ' << i;
    EXPECT_EQ(r.index, 1);
    EXPECT_EQ(r.nullity, 0);
  }
}

TEST(JacobiSpectrum, FourfoldCoverOfK16HasNullityTwo) {
  const Surface s = make_mk(16.0);
  const auto r = jacobi_spectrum(equator(s), s, 4, 1024);
  const double h = r.period / r.grid_size;
  const auto ref = analytic(r.period, 1.0 / 16.0, 6);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(r.eigenvalues[i], ref[i], 5 * h * h);
  EXPECT_EQ(r.nullity, 2);
  EXPECT_EQ(r.index, 1);
  EXPECT_EQ(r.cover_multiplicity, 4);
}

TEST(JacobiSpectrum, MuTwoEquatorDegenerateStable) {
  for (double k : {1.0, 9.0}) {
    const Surface s = make_mk(k, 2.0);
    const auto r = jacobi_spectrum(equator(s), s, 1, 1024);
    const auto ref = analytic(kTwoPi, 0.0, 6);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(r.eigenvalues[i], ref[i], 1e-6);
    EXPECT_EQ(r.index, 0);
    EXPECT_EQ(r.nullity, 1);
  }
}

TEST(JacobiSpectrum, RoundGreatCircle) {
  const auto g = great_circle({1, 0, 0}, {0, 0, 1});
  const auto r = jacobi_spectrum(g, make_sphere(), 1, 1024);
  const auto ref = analytic(kTwoPi, 1.0, 6);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(r.eigenvalues[i], ref[i], 1e-6);
  EXPECT_EQ(r.index, 1);
  EXPECT_EQ(r.nullity, 2);
}

TEST(JacobiSpectrum, MatchesDenseGeneralizedSolver) {
  const Surface s = make_ellipsoid(0.96, 1.0, 1.04);
  const auto g = close_geodesic(s, {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, 6.2});
  // Oracle: dense symmetric-definite solver on the same cyclic pencil.
  std::vector<double> K(256);
  const double h = g.length / 256;
  for (int j = 0; j < 256; ++j) K[j] = gauss_curvature(s, g.samples[j * (g.samples.size() / 256)]);
  std::vector<double> ad, ao, bd, bo;
  build_jacobi_pencil(K, h, ad, ao, bd, bo);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(256, 256), B = Eigen::MatrixXd::Zero(256, 256);
  for (int i = 0; i < 256; ++i) {
    const int j = (i + 1) % 256;
    A(i, i) = ad[i];
    B(i, i) = bd[i];
    A(i, j) = A(j, i) = ao[i];
    B(i, j) = B(j, i) = bo[i];
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  const auto ours = pencil_lowest_eigenvalues(ad, ao, bd, bo, 10, -2.0);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(ours[i], es.eigenvalues()[i], 1e-9 * (1 + std::abs(ours[i])));
}

TEST(JacobiSpectrum, FourthOrderConvergenceOnVariableCurvature) {
  const Surface s = make_ellipsoid(0.96, 1.0, 1.04);
  const auto g = close_geodesic(s, {{1.0 / std::sqrt(0.96), 0.0, 0.0}, {0.0, 0.3, 1.0}, 6.2});
  const auto r1 = jacobi_spectrum(g, s, 1, 256);
  const auto r2 = jacobi_spectrum(g, s, 1, 512);
  const auto r3 = jacobi_spectrum(g, s, 1, 1024);
  for (int i = 0; i < 10; ++i) {
    const double d1 = std::abs(r2.eigenvalues[i] - r1.eigenvalues[i]);
    const double d2 = std::abs(r3.eigenvalues[i] - r2.eigenvalues[i]);
    EXPECT_LE(d2, d1 / 4.0 + 1e-11) << i;
  }
  EXPECT_EQ(r3.nullity, 0);
}

TEST(JacobiSpectrum, IndexStableAlongKSequence) {
  for (double k : {4.0, 9.0, 25.0}) {
    const Surface s = make_mk(k);
    EXPECT_EQ(jacobi_spectrum(equator(s), s, 1, 1024).index, 1) << k;
  }
}

TEST(JacobiSpectrum, GridChecks) {
  const Surface s = make_mk(4.0);
  try {
    jacobi_spectrum(equator(s), s, 1, 128);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooCoarse);
  }
  EXPECT_THROW(jacobi_spectrum(equator(s), s, 0, 1024), Error);
}

TEST(NetworkIndex, Examples) {
  const Surface mk = make_mk(4.0);
  GeodesicNetwork eq{mk, {equator(mk)}, {}, 1e-4, 1e-2};
  EXPECT_EQ(network_index(eq, {3}).index, 1);
  EXPECT_EQ(network_index(eq, {1}).index, 1);

  const Surface sphere = make_sphere();
  GeodesicNetwork two{sphere, {great_circle({1, 0, 0}, {0, 1, 0}), great_circle({1, 0, 0}, {0, 0, 1})}, {}, 1e-4, 1e-2};
  const auto ni = network_index(two, {1, 1});
  EXPECT_EQ(ni.index, 2);
  EXPECT_EQ(ni.spectra.size(), 2u);
  EXPECT_EQ(ni.form, "Q_V = 1*Q_0 + 1*Q_1");

  const Surface mk2 = make_mk(9.0, 2.0);
  GeodesicNetwork flat{mk2, {equator(mk2)}, {}, 1e-4, 1e-2};
  EXPECT_EQ(network_index(flat, {}).index, 0);
  EXPECT_THROW(network_index(two, {1}), Error);
}

TEST(DegeneracyCriterion, Examples) {
  EXPECT_TRUE(degeneracy_criterion_mk(16.0, 2));
  EXPECT_FALSE(degeneracy_criterion_mk(5.0, 1));
  EXPECT_FALSE(degeneracy_criterion_mk(kPi * kPi, 1));
  // Conservative pi Z form flags k = 4, m = 1 although the computed nullity is 0.
  EXPECT_TRUE(degeneracy_criterion_mk(4.0, 1));
  EXPECT_FALSE(degeneracy_exact_mk(4.0, 1));
  EXPECT_TRUE(degeneracy_exact_mk(16.0, 4));
}

TEST(DegeneracyCriterion, SharpFormAgreesWithComputedNullity) {
  for (double k : {4.0, 9.0, 16.0}) {
    const Surface s = make_mk(k);
    const auto g = equator(s);
    for (int m = 1; m <= 4; ++m) {
      const auto r = jacobi_spectrum(g, s, m, 1024);
      EXPECT_EQ(r.nullity > 0, degeneracy_exact_mk(k, m)) << k << ' ' << m;
      if (r.nullity > 0) EXPECT_TRUE(degeneracy_criterion_mk(k, m));
    }
  }
}
