#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geolab/error.hpp"
#include "geolab/vec.hpp"

namespace geolab {

/// Implicit surface {F = 0} in R^3 with analytic first and second derivatives.
class LevelSetFunction {
 public:
  virtual ~LevelSetFunction() = default;
  virtual double value(const Vec3& x) const = 0;
  virtual Vec3 gradient(const Vec3& x) const = 0;
  virtual Sym3 hessian(const Vec3& x) const = 0;
  /// Extent used to scale default tolerances (clustering radius, dedup).
  virtual double diameter() const = 0;
};

/// First fundamental form coefficients of a chart and their first partials.
struct ChartMetricSample {
  double E = 1.0, F = 0.0, G = 1.0;
  double E_u = 0.0, E_v = 0.0;
  double F_u = 0.0, F_v = 0.0;
  double G_u = 0.0, G_v = 0.0;
};

class ChartMetric {
 public:
  virtual ~ChartMetric() = default;
  virtual ChartMetricSample evaluate(double u, double v) const = 0;
};

/// Parameter rectangle of a chart. Periodic axes are never range-checked.
struct ChartDomain {
  double u_min = -1.0, u_max = 1.0;
  double v_min = -1.0, v_max = 1.0;
  bool u_periodic = false;
  bool v_periodic = false;

  bool contains(double u, double v) const {
    return (u_periodic || (u >= u_min && u <= u_max)) && (v_periodic || (v >= v_min && v <= v_max));
  }
};

/// Scalar field f; the rescaled metric is e^{2f} g. Evaluated procedurally, so
/// the support of f is exactly what the implementation returns nonzero on.
class ConformalFactor {
 public:
  virtual ~ConformalFactor() = default;
  virtual double value(const Vec3& x) const = 0;
  /// Chart gradient (df/du, df/dv, 0). Default: central differences.
  virtual Vec3 gradient(const Vec3& x) const;
};

/// Levi-Civita connection coefficients Gamma^c_{ab} of a chart metric.
struct Christoffel {
  std::array<double, 8> g{};
  double operator()(int c, int a, int b) const { return g[4 * c + 2 * a + b]; }
  double& operator()(int c, int a, int b) { return g[4 * c + 2 * a + b]; }
};

/// Metric in a local frame. For charts the frame is (d/du, d/dv); for level
/// sets it is the Monge patch over the coordinate plane spanned by
/// `patch_axes` (the axis with the largest |dF| is the graph direction).
struct MetricTensor {
  Mat2 components;
  std::array<int, 2> patch_axes{-1, -1};
};

struct MkParams {
  double k = 1.0;
  double mu = 1.0;
};

enum class SurfaceKind { LevelSet, Chart };

class Surface {
 public:
  static Surface level_set(std::shared_ptr<const LevelSetFunction> fn, std::string type);
  static Surface chart(std::shared_ptr<const ChartMetric> metric, ChartDomain domain,
                       std::string type);

  /// Returns a copy whose metric carries the extra factor e^{2f}; factors
  /// compose additively. Only chart surfaces accept conformal factors.
  Surface with_conformal_factor(std::shared_ptr<const ConformalFactor> f) const;

  SurfaceKind kind() const { return kind_; }
  bool is_chart() const { return kind_ == SurfaceKind::Chart; }
  const std::string& type() const { return type_; }
  const LevelSetFunction& level_set_function() const;
  const ChartMetric& chart_metric() const;
  const ChartDomain& domain() const { return domain_; }
  const std::vector<std::shared_ptr<const ConformalFactor>>& conformal_factors() const {
    return factors_;
  }
  bool has_conformal_factor() const { return !factors_.empty(); }

  std::optional<MkParams> mk;
  std::optional<std::array<double, 3>> ellipsoid;

  double on_surface_tolerance() const { return on_surface_tol_; }
  void set_on_surface_tolerance(double tol) { on_surface_tol_ = tol; }
  double diameter() const;

  /// Throws PointOffSurface when |F(x)| exceeds the tolerance (level sets)
  /// or x lies outside the chart rectangle.
  void check_on_surface(const Vec3& x) const;
  double level_value(const Vec3& x) const;
  /// Closest-point projection along the gradient (identity on charts, z := 0).
  Vec3 project(const Vec3& x) const;
  /// Ambient unit normal; (0, 0, 1) for charts.
  Vec3 unit_normal(const Vec3& x) const;
  Vec3 tangent_project(const Vec3& x, const Vec3& v) const;
  /// Inner product of tangent vectors at x in the (rescaled) metric.
  double inner(const Vec3& x, const Vec3& a, const Vec3& b) const;
  double speed(const Vec3& x, const Vec3& v) const;
  /// v rotated by +90 degrees in the tangent plane, preserving metric length.
  Vec3 rotate_quarter(const Vec3& x, const Vec3& v) const;
  /// Second derivative of a unit-speed geodesic through x with velocity v.
  Vec3 geodesic_acceleration(const Vec3& x, const Vec3& v) const;

  double conformal_value(const Vec3& x) const;
  Vec3 conformal_gradient(const Vec3& x) const;
  /// Chart metric including the conformal factor.
  Mat2 chart_metric_matrix(const Vec3& x) const;

 private:
  SurfaceKind kind_ = SurfaceKind::LevelSet;
  std::string type_;
  std::shared_ptr<const LevelSetFunction> level_;
  std::shared_ptr<const ChartMetric> chart_;
  ChartDomain domain_;
  std::vector<std::shared_ptr<const ConformalFactor>> factors_;
  double on_surface_tol_ = 1e-10;
};

MetricTensor metric_at(const Surface& surface, const Vec3& point);

/// Gauss curvature of the (possibly conformally rescaled) metric.
double gauss_curvature(const Surface& surface, const Vec3& point);

/// Christoffel symbols of the base chart metric, without conformal factors.
Christoffel base_christoffel(const Surface& surface, const Vec3& chart_point);
/// Christoffel symbols of the rescaled chart metric e^{2f} g.
Christoffel christoffel(const Surface& surface, const Vec3& chart_point);

/// Geodesic curvature after g -> e^{2f} g: e^{-f} (kappa + d_n f), with the
/// curvature vector convention kappa = -nabla_T T.
double conformal_geodesic_curvature(double kappa, double normal_derivative_f, double f_value);

// Built-in surfaces.
Surface make_mk(double k, double mu = 1.0);
/// {a1 x1^2 + a2 x2^2 + a3 x3^2 = 1}
Surface make_ellipsoid(double a1, double a2, double a3);
Surface make_sphere(double radius = 1.0);
/// {x1^2 + x2^2 = 1}
Surface make_cylinder();
Surface make_flat_chart(ChartDomain domain = {-2.0, 2.0, -2.0, 2.0, false, false});
/// Unit sphere in (theta, phi): d phi^2 + sin^2 phi d theta^2, theta periodic.
Surface make_sphere_polar_chart();
/// Unit sphere in central projection from the north pole's tangent plane;
/// great circles are straight lines in this chart.
Surface make_gnomonic_sphere_chart(double half_width = 2.0);

/// Lift of a gnomonic chart point to the unit sphere and back.
Vec3 gnomonic_to_sphere(const Vec3& chart_point);
Vec3 sphere_to_gnomonic(const Vec3& sphere_point);

}  // namespace geolab
