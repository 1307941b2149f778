#include <gtest/gtest.h>

#include <boost/math/special_functions/ellint_2.hpp>
#include <cmath>

#include "geolab/widths.hpp"

using namespace geolab;

namespace {

// Level-circle length on M_k from the closed form 2 pi sqrt(1 - |c|^(2 mu) / k).
double level_mass(double k, double mu, double c) {
  const double r2 = 1.0 - std::pow(std::abs(c), 2.0 * mu) / k;
  return r2 > 0.0 ? kTwoPi * std::sqrt(r2) : 0.0;
}

double ellipse_oracle(double a, double b) {
  const double big = std::max(a, b), small = std::min(a, b);
  return 4.0 * big * boost::math::ellint_2(std::sqrt(1.0 - (small * small) / (big * big)));
}

int isqrt(int p) {
  int r = 0;
  while ((r + 1) * (r + 1) <= p) ++r;
  return r;
}

}  // namespace

TEST(Sweepout, LevelCirclesPeakAtTheEquator) {
  const OneSweepout sw = level_circle_sweepout(make_mk(4.0, 1.0), 512);
  EXPECT_NEAR(sw.max_mass, kTwoPi, 1e-6);
  EXPECT_NEAR(sw.argmax_height, 0.0, 1e-6);
  EXPECT_EQ(sw.masses.front(), 0.0);
  EXPECT_EQ(sw.masses.back(), 0.0);
  for (std::size_t j = 0; j < sw.masses.size(); ++j) {
    EXPECT_NEAR(sw.masses[j], level_mass(4.0, 1.0, sw.heights[j]), 1e-8) << j;
  }
}

TEST(Sweepout, HigherExponentFamily) {
  const OneSweepout sw = level_circle_sweepout(make_mk(9.0, 2.0), 512);
  EXPECT_NEAR(sw.max_mass, kTwoPi, 1e-6);
  for (std::size_t j = 0; j < sw.masses.size(); ++j) {
    EXPECT_NEAR(sw.masses[j], level_mass(9.0, 2.0, sw.heights[j]), 1e-8) << j;
  }
}

TEST(Sweepout, MassJumpsScaleWithTheStep) {
  // |dm/dc| = 2 pi |c| / (k r) grows with |c|, so each jump is bounded by the
  // slope at the outer end of its interval; the pole intervals are unbounded.
  const double k = 4.0, h = 2.0;
  const OneSweepout sw = level_circle_sweepout(make_mk(k, 1.0), 257);
  const double dt = 1.0 / 256.0;
  auto slope = [&](double c) { return kTwoPi * std::abs(c) / (k * std::sqrt(1.0 - c * c / k)); };
  for (std::size_t j = 1; j + 2 < sw.masses.size(); ++j) {
    const double bound = 2.0 * h * dt * std::max(slope(sw.heights[j]), slope(sw.heights[j + 1]));
    EXPECT_LE(std::abs(sw.masses[j + 1] - sw.masses[j]), bound * (1.0 + 1e-9) + 1e-9) << j;
  }
}

TEST(Sweepout, RoundSphereLatitudes) {
  const OneSweepout sw = level_circle_sweepout(make_mk(1.0, 1.0), 129);
  EXPECT_NEAR(sw.max_mass, kTwoPi, 1e-6);
}

TEST(Sweepout, RejectsOtherSurfaces) {
  EXPECT_THROW(level_circle_sweepout(make_ellipsoid(1.0, 1.0, 1.0), 64), Error);
  EXPECT_THROW(level_circle_sweepout(make_mk(4.0, 1.0), 2), Error);
}

TEST(Guth, ExactlyLinearInP) {
  const OneSweepout sw = level_circle_sweepout(make_mk(4.0, 1.0), 512);
  const WidthBound one = guth_p_sweepout_bound(sw, 1);
  EXPECT_EQ(one.upper_bound, sw.max_mass);
  for (int p = 1; p <= 8; ++p) {
    const WidthBound b = guth_p_sweepout_bound(sw, p);
    EXPECT_EQ(b.upper_bound, p * sw.max_mass);
    EXPECT_NEAR(b.upper_bound, p * kTwoPi, 1e-6 * p * kTwoPi);
    EXPECT_EQ(b.label, kUpperBoundLabel);
    EXPECT_TRUE(b.grid_consistent);
  }
  EXPECT_NEAR(guth_p_sweepout_bound(sw, 3).upper_bound, 6.0 * kPi, 1e-6);
  EXPECT_THROW(guth_p_sweepout_bound(sw, 0), Error);
}

TEST(Guth, SimplexEnumerationOracle) {
  const double k = 4.0;
  const OneSweepout sw = level_circle_sweepout(make_mk(k, 1.0), 512);
  const int n = 20;
  const double h = std::sqrt(k);
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double ci = (2.0 * i / (n - 1) - 1.0) * h, cj = (2.0 * j / (n - 1) - 1.0) * h;
      best = std::max(best, level_mass(k, 1.0, ci) + level_mass(k, 1.0, cj));
    }
  }
  const WidthBound b = guth_p_sweepout_bound(sw, 2, n);
  EXPECT_LE(best, b.upper_bound + 1e-9);
  EXPECT_LE(b.grid_max, b.upper_bound + 1e-9);
  // the library's grid uses interpolated masses; both land near the same value
  EXPECT_NEAR(b.grid_max, best, 1e-3);
}

TEST(RoundSphere, WidthTable) {
  for (int p = 1; p <= 16; ++p) EXPECT_DOUBLE_EQ(round_sphere_width(p), kTwoPi * isqrt(p)) << p;
  EXPECT_DOUBLE_EQ(round_sphere_width(1), kTwoPi);
  EXPECT_DOUBLE_EQ(round_sphere_width(3), kTwoPi);
  EXPECT_DOUBLE_EQ(round_sphere_width(9), 6.0 * kPi);
  EXPECT_THROW(round_sphere_width(0), Error);
}

TEST(MkSeeds, OnSurfaceUnitAndBanded) {
  const Surface s = make_mk(100.0, 1.0);
  const auto seeds = mk_seeds(s, 64, 11, 0.25);
  ASSERT_EQ(seeds.size(), 64u);
  for (const auto& sd : seeds) {
    EXPECT_LE(std::abs(s.level_value(sd.point)), 1e-12);
    EXPECT_LE(std::abs(sd.point.z), 0.25 * 10.0 + 1e-12);
    EXPECT_NEAR(s.speed(sd.point, sd.direction), 1.0, 1e-12);
    EXPECT_NEAR(dot(sd.direction, s.unit_normal(sd.point)), 0.0, 1e-12);
  }
  const auto again = mk_seeds(s, 64, 11, 0.25);
  const auto other = mk_seeds(s, 64, 12, 0.25);
  bool differs = false;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    EXPECT_EQ(seeds[i].point.x, again[i].point.x);
    EXPECT_EQ(seeds[i].direction.z, again[i].direction.z);
    differs = differs || seeds[i].point.z != other[i].point.z;
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(mk_seeds(s, 4, 1, 1.5), Error);
}

TEST(MkExperiment, EquatorHasIndexOne) {
  MkExperimentOptions o;
  o.p = 3;
  const auto r = mk_multiplicity_experiment(4.0, 1.0, kTwoPi + 1e-3, 12, 7, o);
  ASSERT_TRUE(r.gamma0_found);
  EXPECT_EQ(r.gamma0_classes, 1);
  const FoundGeodesic& g = r.found[static_cast<std::size_t>(r.gamma0_class)];
  EXPECT_TRUE(g.is_gamma0);
  EXPECT_NEAR(g.length, kTwoPi, 1e-8);
  EXPECT_EQ(g.index, 1);
  EXPECT_EQ(g.nullity, 0);
  EXPECT_EQ(g.self_vertices, 0);
  EXPECT_TRUE(r.pass());
  ASSERT_EQ(r.widths.size(), 3u);
  for (const auto& w : r.widths) {
    EXPECT_NEAR(w.upper_bound, kTwoPi * w.l, 1e-6);
    EXPECT_GE(w.gap, -1e-9);
    EXPECT_LE(w.gap, 1e-6);
  }
}

TEST(MkExperiment, FlatEquatorIsDegenerateStable) {
  MkExperimentOptions o;
  o.p = 2;
  const auto r = mk_multiplicity_experiment(9.0, 2.0, kTwoPi + 1e-3, 12, 7, o);
  ASSERT_TRUE(r.gamma0_found);
  const FoundGeodesic& g = r.found[static_cast<std::size_t>(r.gamma0_class)];
  EXPECT_EQ(g.index, 0);
  EXPECT_EQ(g.nullity, 1);
  EXPECT_TRUE(r.short_class_is_gamma0);
}

TEST(MkExperiment, EveryShortGeodesicMeetsTheEquator) {
  MkExperimentOptions o;
  o.p = 2;
  const auto r = mk_multiplicity_experiment(25.0, 1.0, 4.0 * kPi, 24, 3, o);
  EXPECT_EQ(r.converged + r.failed, 24);
  EXPECT_TRUE(r.all_intersect_equator);
  EXPECT_TRUE(r.short_class_is_gamma0);
  for (const auto& f : r.found) {
    EXPECT_LE(f.length, 4.0 * kPi);
    EXPECT_TRUE(f.intersects_equator);
  }
  // meridians have length about 4 sqrt(k) > 4 pi and are excluded by the cap
  EXPECT_GT(ellipse_oracle(1.0, 5.0), 4.0 * kPi);
}

TEST(MkExperiment, ThreadCountDoesNotChangeTheResult) {
  MkExperimentOptions one, three;
  one.threads = 1;
  three.threads = 3;
  one.p = three.p = 2;
  const auto a = mk_multiplicity_experiment(16.0, 1.0, 4.0 * kPi, 10, 5, one);
  const auto b = mk_multiplicity_experiment(16.0, 1.0, 4.0 * kPi, 10, 5, three);
  ASSERT_EQ(a.found.size(), b.found.size());
  EXPECT_EQ(a.converged, b.converged);
  for (std::size_t i = 0; i < a.found.size(); ++i) {
    EXPECT_EQ(a.found[i].first_seed, b.found[i].first_seed);
    EXPECT_EQ(a.found[i].hits, b.found[i].hits);
    EXPECT_EQ(a.found[i].length, b.found[i].length);
    EXPECT_EQ(a.found[i].eigenvalues, b.found[i].eigenvalues);
  }
}

TEST(MkExperiment, EmptySeedSetIsValid) {
  const auto r = mk_multiplicity_experiment(4.0, 1.0, 4.0 * kPi, 0, 1);
  EXPECT_TRUE(r.found.empty());
  EXPECT_FALSE(r.gamma0_found);
  EXPECT_FALSE(r.pass());
  EXPECT_THROW(mk_multiplicity_experiment(0.5, 1.0, 4.0 * kPi, 1, 1), Error);
}

TEST(Ellipse, CircumferenceAgainstEllipticIntegral) {
  for (double a : {1.0, 0.9, 1.05, 2.0}) {
    for (double b : {1.0, 0.95, 3.0}) {
      EXPECT_NEAR(ellipse_circumference(a, b), ellipse_oracle(a, b), 1e-12 * ellipse_oracle(a, b));
    }
  }
  EXPECT_NEAR(ellipse_circumference(1.0, 1.0), kTwoPi, 1e-14);
}

TEST(Ellipsoid, CoordinateGeodesicsAreNondegenerate) {
  const EllipsoidReport r = ellipsoid_experiment(0.96, 1.0, 1.04);
  ASSERT_EQ(r.geodesics.size(), 3u);
  for (const auto& g : r.geodesics) {
    const int j = (g.plane + 1) % 3, k = (g.plane + 2) % 3;
    const double A = 1.0 / std::sqrt(r.a[static_cast<std::size_t>(j)]);
    const double B = 1.0 / std::sqrt(r.a[static_cast<std::size_t>(k)]);
    EXPECT_NEAR(g.length, ellipse_oracle(A, B), 1e-6);
    EXPECT_LE(g.plane_residual, 1e-8);
    for (int m = 0; m < 3; ++m) EXPECT_EQ(g.nullity[static_cast<std::size_t>(m)], 0);
  }
  EXPECT_TRUE(r.distinct_lengths);
  EXPECT_TRUE(r.lengths_match);
  EXPECT_TRUE(r.nondegenerate);
  EXPECT_TRUE(r.pass());
}

TEST(Ellipsoid, RoundSphereGreatCirclesAreDegenerate) {
  const EllipsoidReport r = ellipsoid_experiment(1.0, 1.0, 1.0);
  for (const auto& g : r.geodesics) {
    EXPECT_NEAR(g.length, kTwoPi, 1e-8);
    EXPECT_EQ(g.nullity[0], 2);
  }
  EXPECT_FALSE(r.nondegenerate);
  EXPECT_FALSE(r.distinct_lengths);
}

TEST(Ellipsoid, RepresentationsOfRoundWidths) {
  const EllipsoidReport r = ellipsoid_experiment(0.96, 1.0, 1.04);
  ASSERT_FALSE(r.multiplicity.empty());
  for (const auto& row : r.multiplicity) {
    const int q = isqrt(row.p);
    // lengths near 2 pi: the admissible multiplicity vectors are those with sum q
    int expected = 0;
    for (int a = 0; a <= q; ++a)
      for (int b = 0; a + b <= q; ++b) ++expected;
    EXPECT_EQ(static_cast<int>(row.representations.size()), expected) << row.p;
    for (const auto& m : row.representations) EXPECT_EQ(m[0] + m[1] + m[2], q);
    EXPECT_EQ(row.all_ones_admissible, q == 3) << row.p;
    EXPECT_EQ(row.multiplicity_forced, q > 3) << row.p;
  }
}

TEST(Ellipsoid, Errors) {
  EXPECT_THROW(ellipsoid_experiment(1.04, 1.0, 0.96), Error);
  EXPECT_THROW(ellipsoid_experiment(0.5, 1.0, 1.0), Error);
  EllipsoidOptions o;
  o.seed_budget = 2;
  o.close_tolerance = 1e-300;
  try {
    ellipsoid_experiment(0.96, 1.0, 1.04, o);
    FAIL() << "expected SeedBudgetExhausted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SeedBudgetExhausted);
  }
}
