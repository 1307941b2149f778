#pragma once

#include <string>
#include <vector>

#include "geolab/surface.hpp"

namespace geolab {

struct GeodesicPath {
  std::vector<Vec3> points;      // n + 1 points including both ends
  std::vector<Vec3> velocities;  // unit speed in the surface metric
  double step = 0.0;
  double max_speed_drift = 0.0;  // largest |speed - 1| before renormalization
};

/// RK4 for the unit-speed geodesic flow. Level-set paths are projected back
/// to {F = 0} after every step; velocities are re-tangentialized and
/// renormalized. A negative arc length integrates backwards.
GeodesicPath integrate_geodesic(const Surface& surface, const Vec3& p0, const Vec3& v0,
                                double arc_length, double step);

/// Closed curve stored as its primitive loop, sampled uniformly on a circle
/// of length 2*pi (or [0, 1] for open strands).
struct GeodesicCurve {
  std::vector<Vec3> samples;
  std::vector<Vec3> tangents;   // unit tangents in the surface metric
  std::vector<double> speeds;   // |gamma'| per sample in the sampling parameter
  double length = 0.0;
  double closure_residual = 0.0;
  bool closed = true;
  bool primitive = true;        // false when shooting converged onto a cover
  int cover_multiplicity = 1;   // m when the shooting period was m * length
  bool degenerate_shooting = false;
  int iterations = 0;
  std::string surface_type;

  double parameter_step() const;
};

/// Builds a curve record from samples; tangents, speeds and length are
/// computed from the samples.
GeodesicCurve make_curve(const Surface& surface, std::vector<Vec3> samples, bool closed);

struct GeodesicSeed {
  Vec3 point;
  Vec3 direction;
  double period = kTwoPi;
};

struct CloseOptions {
  int samples = 4096;
  double tolerance = 1e-10;
  int max_iterations = 40;
  int max_cover = 8;
};

/// Newton shooting on a Poincare section through the seed: unknowns are the
/// offset along the section, the direction angle and the period; residuals
/// are the position mismatch in the section frame and the direction angle
/// mismatch. Steps are minimum-norm least squares, so families of closed
/// geodesics (round sphere, degenerate equators) still converge; a singular
/// differential at the solution sets `degenerate_shooting`.
GeodesicCurve close_geodesic(const Surface& surface, const GeodesicSeed& seed,
                             const CloseOptions& options = {});

double curve_length(const GeodesicCurve& curve, const Surface& surface);

/// Signed geodesic curvature k = <kappa, n> per sample, where
/// kappa = -nabla_T T and n is T rotated by +90 degrees.
std::vector<double> geodesic_curvature_profile(const GeodesicCurve& curve, const Surface& surface);

/// First and second derivatives of sampled points with respect to the
/// sampling parameter: fourth-order periodic stencils for closed curves,
/// fourth-order one-sided stencils at the ends of open ones. Periodic chart
/// coordinates are unwrapped first.
void sample_derivatives(const Surface& surface, const std::vector<Vec3>& pts, bool closed, double h,
                        std::vector<Vec3>& d1, std::vector<Vec3>* d2);

}  // namespace geolab
