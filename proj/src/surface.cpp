#include "geolab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace geolab {

namespace {

class SphereFn final : public LevelSetFunction {
 public:
  explicit SphereFn(double r) : r_(r) {}
  double value(const Vec3& x) const override { return dot(x, x) - r_ * r_; }
  Vec3 gradient(const Vec3& x) const override { return 2.0 * x; }
  Sym3 hessian(const Vec3&) const override { return Sym3::diagonal(2.0, 2.0, 2.0); }
  double diameter() const override { return 2.0 * r_; }

 private:
  double r_;
};

class CylinderFn final : public LevelSetFunction {
 public:
  double value(const Vec3& x) const override { return x.x * x.x + x.y * x.y - 1.0; }
  Vec3 gradient(const Vec3& x) const override { return {2.0 * x.x, 2.0 * x.y, 0.0}; }
  Sym3 hessian(const Vec3&) const override { return Sym3::diagonal(2.0, 2.0, 0.0); }
  double diameter() const override { return 2.0; }
};

// x1^2 + x2^2 + |x3|^{2 mu} / k - 1
class MkFn final : public LevelSetFunction {
 public:
  MkFn(double k, double mu) : k_(k), mu_(mu) {}

  double value(const Vec3& x) const override {
    return x.x * x.x + x.y * x.y + zpow(x.z, 2.0 * mu_) / k_ - 1.0;
  }
  Vec3 gradient(const Vec3& x) const override {
    const double gz = 2.0 * mu_ * std::copysign(zpow(x.z, 2.0 * mu_ - 1.0), x.z) / k_;
    return {2.0 * x.x, 2.0 * x.y, gz};
  }
  Sym3 hessian(const Vec3& x) const override {
    const double hz = 2.0 * mu_ * (2.0 * mu_ - 1.0) * zpow(x.z, 2.0 * mu_ - 2.0) / k_;
    return Sym3::diagonal(2.0, 2.0, hz);
  }
  double diameter() const override { return std::max(2.0, 2.0 * std::pow(k_, 0.5 / mu_)); }

 private:
  // |z|^e, exact for the small integer exponents the built-ins use.
  static double zpow(double z, double e) {
    const double a = std::abs(z);
    if (e == 0.0) return 1.0;
    if (e == 1.0) return a;
    if (e == 2.0) return a * a;
    if (e == 3.0) return a * a * a;
    if (e == 4.0) return (a * a) * (a * a);
    return std::pow(a, e);
  }

  double k_, mu_;
};

class EllipsoidFn final : public LevelSetFunction {
 public:
  explicit EllipsoidFn(std::array<double, 3> a) : a_(a) {}
  double value(const Vec3& x) const override {
    return a_[0] * x.x * x.x + a_[1] * x.y * x.y + a_[2] * x.z * x.z - 1.0;
  }
  Vec3 gradient(const Vec3& x) const override {
    return {2.0 * a_[0] * x.x, 2.0 * a_[1] * x.y, 2.0 * a_[2] * x.z};
  }
  Sym3 hessian(const Vec3&) const override {
    return Sym3::diagonal(2.0 * a_[0], 2.0 * a_[1], 2.0 * a_[2]);
  }
  double diameter() const override {
    return 2.0 / std::sqrt(std::min({a_[0], a_[1], a_[2]}));
  }

 private:
  std::array<double, 3> a_;
};

class FlatMetric final : public ChartMetric {
 public:
  ChartMetricSample evaluate(double, double) const override { return {}; }
};

// u = theta (longitude), v = phi (colatitude)
class SpherePolarMetric final : public ChartMetric {
 public:
  ChartMetricSample evaluate(double, double v) const override {
    ChartMetricSample m;
    const double s = std::sin(v), c = std::cos(v);
    m.E = s * s;
    m.E_v = 2.0 * s * c;
    return m;
  }
};

class GnomonicMetric final : public ChartMetric {
 public:
  ChartMetricSample evaluate(double u, double v) const override {
    const double rho = 1.0 + u * u + v * v;
    const double r2 = 1.0 / (rho * rho);
    const double r3 = r2 / rho;
    ChartMetricSample m;
    m.E = (1.0 + v * v) * r2;
    m.F = -u * v * r2;
    m.G = (1.0 + u * u) * r2;
    m.E_u = -4.0 * u * (1.0 + v * v) * r3;
    m.E_v = 2.0 * v * r2 - 4.0 * v * (1.0 + v * v) * r3;
    m.F_u = -v * r2 + 4.0 * u * u * v * r3;
    m.F_v = -u * r2 + 4.0 * u * v * v * r3;
    m.G_u = 2.0 * u * r2 - 4.0 * u * (1.0 + u * u) * r3;
    m.G_v = -4.0 * v * (1.0 + u * u) * r3;
    return m;
  }
};

Mat2 to_mat(const ChartMetricSample& m) { return {m.E, m.F, m.G}; }

// dg[d] = partial_d of (g_00, g_01, g_11)
void metric_derivatives(const ChartMetricSample& m, double dg[2][3]) {
  dg[0][0] = m.E_u;
  dg[0][1] = m.F_u;
  dg[0][2] = m.G_u;
  dg[1][0] = m.E_v;
  dg[1][1] = m.F_v;
  dg[1][2] = m.G_v;
}

double comp(const double* g3, int a, int b) { return a + b == 0 ? g3[0] : (a + b == 1 ? g3[1] : g3[2]); }

Christoffel christoffel_from_sample(const ChartMetricSample& m) {
  const Mat2 gi = to_mat(m).inverse();
  const double ginv[2][2] = {{gi.a11, gi.a12}, {gi.a12, gi.a22}};
  double dg[2][3];
  metric_derivatives(m, dg);
  Christoffel out;
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        double s = 0.0;
        for (int d = 0; d < 2; ++d) {
          s += ginv[c][d] * (comp(dg[a], d, b) + comp(dg[b], d, a) - comp(dg[d], a, b));
        }
        out(c, a, b) = 0.5 * s;
      }
    }
  }
  return out;
}

// Gauss curvature of a chart metric from finite differences of its
// Christoffel symbols, fourth-order stencil.
double chart_curvature(const ChartMetric& metric, double u, double v) {
  constexpr double h = 2.5e-4;
  auto gam = [&](double uu, double vv) { return christoffel_from_sample(metric.evaluate(uu, vv)); };
  auto d4 = [&](int axis, int c, int a, int b) {
    auto at = [&](double t) {
      return axis == 0 ? gam(u + t, v)(c, a, b) : gam(u, v + t)(c, a, b);
    };
    return (at(-2 * h) - at(2 * h) + 8.0 * (at(h) - at(-h))) / (12.0 * h);
  };
  const ChartMetricSample m = metric.evaluate(u, v);
  const Christoffel G = christoffel_from_sample(m);
  // R^a_{101} for a = 0, 1 (indices: 0 = u, 1 = v)
  double r[2];
  for (int a = 0; a < 2; ++a) {
    double s = d4(0, a, 1, 1) - d4(1, a, 0, 1);
    for (int e = 0; e < 2; ++e) s += G(a, 0, e) * G(e, 1, 1) - G(a, 1, e) * G(e, 0, 1);
    r[a] = s;
  }
  const double r0101 = m.E * r[0] + m.F * r[1];
  return r0101 / (m.E * m.G - m.F * m.F);
}

// Hessian (f_uu, f_uv, f_vv) of the summed conformal factor by central differences.
Mat2 conformal_hessian(const Surface& s, const Vec3& x) {
  constexpr double h = 1e-4;
  auto f = [&](double du, double dv) { return s.conformal_value({x.x + du, x.y + dv, 0.0}); };
  const double f0 = f(0, 0);
  const double fuu = (f(h, 0) - 2.0 * f0 + f(-h, 0)) / (h * h);
  const double fvv = (f(0, h) - 2.0 * f0 + f(0, -h)) / (h * h);
  const double fuv = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
  return {fuu, fuv, fvv};
}

}  // namespace

Vec3 ConformalFactor::gradient(const Vec3& x) const {
  constexpr double h = 1e-5;
  auto d = [&](const Vec3& e) {
    return (value(x - 2.0 * h * e) - value(x + 2.0 * h * e) + 8.0 * (value(x + h * e) - value(x - h * e))) /
           (12.0 * h);
  };
  return {d({1.0, 0.0, 0.0}), d({0.0, 1.0, 0.0}), 0.0};
}

Surface Surface::level_set(std::shared_ptr<const LevelSetFunction> fn, std::string type) {
  Surface s;
  s.kind_ = SurfaceKind::LevelSet;
  s.level_ = std::move(fn);
  s.type_ = std::move(type);
  return s;
}

Surface Surface::chart(std::shared_ptr<const ChartMetric> metric, ChartDomain domain, std::string type) {
  Surface s;
  s.kind_ = SurfaceKind::Chart;
  s.chart_ = std::move(metric);
  s.domain_ = domain;
  s.type_ = std::move(type);
  return s;
}

Surface Surface::with_conformal_factor(std::shared_ptr<const ConformalFactor> f) const {
  if (kind_ != SurfaceKind::Chart) {
    throw Error(ErrorKind::InvalidArgument, "conformal factors require a chart surface");
  }
  Surface s = *this;
  s.factors_.push_back(std::move(f));
  return s;
}

const LevelSetFunction& Surface::level_set_function() const {
  if (!level_) throw Error(ErrorKind::InvalidArgument, "surface '" + type_ + "' is not a level set");
  return *level_;
}

const ChartMetric& Surface::chart_metric() const {
  if (!chart_) throw Error(ErrorKind::ChartUnavailable, "surface '" + type_ + "' has no chart");
  return *chart_;
}

double Surface::diameter() const {
  if (level_) return level_->diameter();
  const double du = domain_.u_periodic ? 0.0 : domain_.u_max - domain_.u_min;
  const double dv = domain_.v_periodic ? 0.0 : domain_.v_max - domain_.v_min;
  const double d = std::hypot(du, dv);
  return d > 0.0 ? d : kPi;
}

double Surface::level_value(const Vec3& x) const { return level_ ? level_->value(x) : 0.0; }

void Surface::check_on_surface(const Vec3& x) const {
  if (level_) {
    const double f = level_->value(x);
    if (!(std::abs(f) <= on_surface_tol_)) {
      throw Error(ErrorKind::PointOffSurface,
                  "|F| = " + std::to_string(std::abs(f)) + " exceeds tolerance on '" + type_ + "'");
    }
    return;
  }
  if (!domain_.contains(x.x, x.y)) {
    throw Error(ErrorKind::PointOffSurface, "point outside the chart rectangle of '" + type_ + "'");
  }
}

Vec3 Surface::project(const Vec3& x) const {
  if (!level_) return {x.x, x.y, 0.0};
  Vec3 p = x;
  for (int it = 0; it < 50; ++it) {
    const double f = level_->value(p);
    const Vec3 g = level_->gradient(p);
    const double g2 = dot(g, g);
    if (g2 == 0.0) throw Error(ErrorKind::PointOffSurface, "vanishing gradient during projection");
    const Vec3 step = (f / g2) * g;
    p -= step;
    if (norm(step) <= 1e-16 * (1.0 + norm(p))) break;
  }
  return p;
}

Vec3 Surface::unit_normal(const Vec3& x) const {
  if (!level_) return {0.0, 0.0, 1.0};
  return normalized(level_->gradient(x));
}

Vec3 Surface::tangent_project(const Vec3& x, const Vec3& v) const {
  if (!level_) return {v.x, v.y, 0.0};
  const Vec3 n = unit_normal(x);
  return v - dot(v, n) * n;
}

Mat2 Surface::chart_metric_matrix(const Vec3& x) const {
  const Mat2 g = to_mat(chart_metric().evaluate(x.x, x.y));
  if (factors_.empty()) return g;
  const double s = std::exp(2.0 * conformal_value(x));
  return {s * g.a11, s * g.a12, s * g.a22};
}

double Surface::inner(const Vec3& x, const Vec3& a, const Vec3& b) const {
  if (level_) return dot(a, b);
  return chart_metric_matrix(x).inner(a.x, a.y, b.x, b.y);
}

double Surface::speed(const Vec3& x, const Vec3& v) const { return std::sqrt(inner(x, v, v)); }

Vec3 Surface::rotate_quarter(const Vec3& x, const Vec3& v) const {
  if (level_) return cross(unit_normal(x), v);
  // The conformal factor cancels in (-(g v)_2, (g v)_1) / sqrt(det g).
  const Mat2 g = to_mat(chart_metric().evaluate(x.x, x.y));
  const double gv1 = g.a11 * v.x + g.a12 * v.y;
  const double gv2 = g.a12 * v.x + g.a22 * v.y;
  const double sd = std::sqrt(g.det());
  return {-gv2 / sd, gv1 / sd, 0.0};
}

Vec3 Surface::geodesic_acceleration(const Vec3& x, const Vec3& v) const {
  if (level_) {
    const Vec3 g = level_->gradient(x);
    const double lambda = -level_->hessian(x).quad(v) / dot(g, g);
    return lambda * g;
  }
  const Christoffel G = christoffel(*this, x);
  const double w[2] = {v.x, v.y};
  double acc[2] = {0.0, 0.0};
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) acc[c] -= G(c, a, b) * w[a] * w[b];
    }
  }
  return {acc[0], acc[1], 0.0};
}

double Surface::conformal_value(const Vec3& x) const {
  double f = 0.0;
  for (const auto& c : factors_) f += c->value(x);
  return f;
}

Vec3 Surface::conformal_gradient(const Vec3& x) const {
  Vec3 g;
  for (const auto& c : factors_) g += c->gradient(x);
  return g;
}

MetricTensor metric_at(const Surface& surface, const Vec3& point) {
  surface.check_on_surface(point);
  MetricTensor t;
  if (surface.is_chart()) {
    t.components = surface.chart_metric_matrix(point);
    return t;
  }
  // Monge patch over the coordinate plane orthogonal to the dominant
  // gradient axis: x_c = h(x_a, x_b).
  const Vec3 g = surface.level_set_function().gradient(point);
  int c = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(g[i]) > std::abs(g[c])) c = i;
  }
  const int a = c == 0 ? 1 : 0;
  const int b = c == 2 ? 1 : 2;
  const double ha = -g[a] / g[c];
  const double hb = -g[b] / g[c];
  t.components = {1.0 + ha * ha, ha * hb, 1.0 + hb * hb};
  t.patch_axes = {a, b};
  return t;
}

double gauss_curvature(const Surface& surface, const Vec3& point) {
  surface.check_on_surface(point);
  if (!surface.is_chart()) {
    const auto& fn = surface.level_set_function();
    const Vec3 g = fn.gradient(point);
    const Sym3 H = fn.hessian(point);
    // adj(H) for symmetric H
    Sym3 adj;
    adj(0, 0) = H(1, 1) * H(2, 2) - H(1, 2) * H(2, 1);
    adj(1, 1) = H(0, 0) * H(2, 2) - H(0, 2) * H(2, 0);
    adj(2, 2) = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
    adj(0, 1) = adj(1, 0) = H(0, 2) * H(2, 1) - H(0, 1) * H(2, 2);
    adj(0, 2) = adj(2, 0) = H(0, 1) * H(1, 2) - H(0, 2) * H(1, 1);
    adj(1, 2) = adj(2, 1) = H(0, 2) * H(1, 0) - H(0, 0) * H(1, 2);
    const double g2 = dot(g, g);
    return adj.quad(g) / (g2 * g2);
  }
  const double kg = chart_curvature(surface.chart_metric(), point.x, point.y);
  if (!surface.has_conformal_factor()) return kg;
  // K_h = e^{-2f} (K_g - Lap_g f)
  const ChartMetricSample m = surface.chart_metric().evaluate(point.x, point.y);
  const Mat2 gi = to_mat(m).inverse();
  const Christoffel G = christoffel_from_sample(m);
  const Vec3 df = surface.conformal_gradient(point);
  const Mat2 hf = conformal_hessian(surface, point);
  const double hess[2][2] = {{hf.a11, hf.a12}, {hf.a12, hf.a22}};
  const double ginv[2][2] = {{gi.a11, gi.a12}, {gi.a12, gi.a22}};
  double lap = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double cov = hess[a][b] - G(0, a, b) * df.x - G(1, a, b) * df.y;
      lap += ginv[a][b] * cov;
    }
  }
  return std::exp(-2.0 * surface.conformal_value(point)) * (kg - lap);
}

Christoffel base_christoffel(const Surface& surface, const Vec3& chart_point) {
  return christoffel_from_sample(surface.chart_metric().evaluate(chart_point.x, chart_point.y));
}

Christoffel christoffel(const Surface& surface, const Vec3& chart_point) {
  const ChartMetricSample m = surface.chart_metric().evaluate(chart_point.x, chart_point.y);
  Christoffel G = christoffel_from_sample(m);
  if (!surface.has_conformal_factor()) return G;
  // Gamma_h = Gamma_g + delta^c_a f_b + delta^c_b f_a - g_ab g^{cd} f_d
  const Vec3 grad = surface.conformal_gradient(chart_point);
  const double df[2] = {grad.x, grad.y};
  const Mat2 gm = to_mat(m);
  const Mat2 gi = gm.inverse();
  const double g[2][2] = {{gm.a11, gm.a12}, {gm.a12, gm.a22}};
  const double raised[2] = {gi.a11 * df[0] + gi.a12 * df[1], gi.a12 * df[0] + gi.a22 * df[1]};
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        double add = -g[a][b] * raised[c];
        if (c == a) add += df[b];
        if (c == b) add += df[a];
        G(c, a, b) += add;
      }
    }
  }
  return G;
}

double conformal_geodesic_curvature(double kappa, double normal_derivative_f, double f_value) {
  return std::exp(-f_value) * (kappa + normal_derivative_f);
}

Surface make_mk(double k, double mu) {
  if (!(k > 0.0)) throw Error(ErrorKind::InvalidArgument, "M_k requires k > 0");
  if (!(mu >= 1.0)) throw Error(ErrorKind::InvalidArgument, "M_k requires mu >= 1");
  Surface s = Surface::level_set(std::make_shared<MkFn>(k, mu), "mk");
  s.mk = MkParams{k, mu};
  return s;
}

Surface make_ellipsoid(double a1, double a2, double a3) {
  if (!(a1 > 0.0 && a2 > 0.0 && a3 > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "ellipsoid coefficients must be positive");
  }
  Surface s = Surface::level_set(std::make_shared<EllipsoidFn>(std::array<double, 3>{a1, a2, a3}),
                                 "ellipsoid");
  s.ellipsoid = std::array<double, 3>{a1, a2, a3};
  return s;
}

Surface make_sphere(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "sphere radius must be positive");
  return Surface::level_set(std::make_shared<SphereFn>(radius), "sphere");
}

Surface make_cylinder() { return Surface::level_set(std::make_shared<CylinderFn>(), "cylinder"); }

Surface make_flat_chart(ChartDomain domain) {
  return Surface::chart(std::make_shared<FlatMetric>(), domain, "flat");
}

Surface make_sphere_polar_chart() {
  return Surface::chart(std::make_shared<SpherePolarMetric>(),
                        ChartDomain{0.0, kTwoPi, 1e-3, kPi - 1e-3, true, false}, "sphere_polar");
}

Surface make_gnomonic_sphere_chart(double half_width) {
  return Surface::chart(std::make_shared<GnomonicMetric>(),
                        ChartDomain{-half_width, half_width, -half_width, half_width, false, false},
                        "gnomonic_sphere");
}

Vec3 gnomonic_to_sphere(const Vec3& c) {
  return Vec3{c.x, c.y, 1.0} / std::sqrt(1.0 + c.x * c.x + c.y * c.y);
}

Vec3 sphere_to_gnomonic(const Vec3& p) { return {p.x / p.z, p.y / p.z, 0.0}; }

}  // namespace geolab
