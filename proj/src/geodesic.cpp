#include "geolab/geodesic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

#include "geolab/kernels.hpp"

namespace geolab {

namespace {

constexpr double kMaxStepDrift = 1e-6;

struct FlowState {
  Vec3 x;
  Vec3 v;
  double drift = 0.0;
};

// One RK4 step of x' = v, v' = a(x, v), followed by the constraint cleanup.
FlowState flow_step(const Surface& s, const FlowState& st, double h) {
  const Vec3 x = st.x, v = st.v;
  const Vec3 a1 = s.geodesic_acceleration(x, v);
  const Vec3 x2 = x + (0.5 * h) * v, v2 = v + (0.5 * h) * a1;
  const Vec3 a2 = s.geodesic_acceleration(x2, v2);
  const Vec3 x3 = x + (0.5 * h) * v2, v3 = v + (0.5 * h) * a2;
  const Vec3 a3 = s.geodesic_acceleration(x3, v3);
  const Vec3 x4 = x + h * v3, v4 = v + h * a3;
  const Vec3 a4 = s.geodesic_acceleration(x4, v4);
  FlowState out;
  out.x = x + (h / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4);
  out.v = v + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  if (s.is_chart()) {
    if (!s.domain().contains(out.x.x, out.x.y)) {
      throw Error(ErrorKind::LeftChartDomain, "geodesic left the chart rectangle of '" + s.type() + "'");
    }
  } else {
    out.x = s.project(out.x);
    out.v = s.tangent_project(out.x, out.v);
  }
  const double sp = s.speed(out.x, out.v);
  out.drift = std::max(st.drift, std::abs(sp - 1.0));
  if (std::abs(sp - 1.0) > kMaxStepDrift) {
    throw Error(ErrorKind::StepTooLarge, "speed drift " + std::to_string(std::abs(sp - 1.0)) +
                                             " in one step of size " + std::to_string(std::abs(h)));
  }
  out.v = out.v / sp;
  return out;
}

Vec3 unit_in_metric(const Surface& s, const Vec3& x, const Vec3& v) {
  const Vec3 t = s.tangent_project(x, v);
  return t / s.speed(x, t);
}

FlowState shoot(const Surface& s, const Vec3& x0, const Vec3& v0, double length, int steps) {
  FlowState st{x0, v0, 0.0};
  const double h = length / steps;
  for (int i = 0; i < steps; ++i) st = flow_step(s, st, h);
  return st;
}

struct Section {
  const Surface& s;
  Vec3 p0, v0, w0;
  int steps;

  struct Eval {
    std::array<double, 3> r{};
    Vec3 x0, dir;
    double norm() const { return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]); }
  };

  Eval operator()(const std::array<double, 3>& z) const {
    Eval e;
    e.x0 = s.project(p0 + z[0] * w0);
    const Vec3 e1 = unit_in_metric(s, e.x0, v0);
    const Vec3 e2 = s.rotate_quarter(e.x0, e1);
    e.dir = std::cos(z[1]) * e1 + std::sin(z[1]) * e2;
    const FlowState end = shoot(s, e.x0, e.dir, z[2], steps);
    const Vec3 d = end.x - e.x0;
    e.r[0] = s.inner(e.x0, d, e1);
    e.r[1] = s.inner(e.x0, d, e2);
    const Vec3 vt = s.tangent_project(e.x0, end.v);
    const double ang = std::atan2(s.inner(e.x0, vt, e2), s.inner(e.x0, vt, e1));
    e.r[2] = std::remainder(ang - z[1], kTwoPi);
    return e;
  }
};

// Position plus direction mismatch after flowing for `length`.
double loop_mismatch(const Surface& s, const Vec3& x0, const Vec3& v0, double length, int steps) {
  const FlowState end = shoot(s, x0, v0, length, steps);
  const Vec3 vt = s.tangent_project(x0, end.v);
  const double ang = std::atan2(s.inner(x0, vt, s.rotate_quarter(x0, v0)), s.inner(x0, vt, v0));
  return std::sqrt(s.inner(x0, end.x - x0, end.x - x0)) + std::abs(ang);
}

struct NewtonResult {
  std::array<double, 3> z{};
  Section::Eval eval;
  int iterations = 0;
  bool singular = false;
};

NewtonResult newton(const Section& sec, std::array<double, 3> z, const CloseOptions& opt,
                    double diameter) {
  NewtonResult res;
  Section::Eval cur = sec(z);
  const double period0 = z[2];
  Eigen::Matrix3d J;
  auto jacobian = [&](const std::array<double, 3>& at) {
    const std::array<double, 3> eps{1e-6 * diameter, 1e-6, 1e-6 * at[2]};
    for (int j = 0; j < 3; ++j) {
      auto zp = at, zm = at;
      zp[j] += eps[j];
      zm[j] -= eps[j];
      const auto ep = sec(zp), em = sec(zm);
      for (int i = 0; i < 3; ++i) {
        double diff = ep.r[i] - em.r[i];
        if (i == 2) diff = std::remainder(diff, kTwoPi);
        J(i, j) = diff / (2.0 * eps[j]);
      }
    }
  };
  int it = 0;
  for (; it < opt.max_iterations && cur.norm() > opt.tolerance; ++it) {
    jacobian(z);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    // Truncate only at the finite-difference noise floor: degenerate closed
    // geodesics have genuinely small singular values that must be kept.
    svd.setThreshold(1e-8);
    const Eigen::Vector3d rhs(cur.r[0], cur.r[1], cur.r[2]);
    Eigen::Vector3d dz = -svd.solve(rhs);
    // Keep each Newton step local to the section.
    const double lim[3] = {0.1 * diameter, 0.3, 0.25 * z[2]};
    double scale = 1.0;
    for (int j = 0; j < 3; ++j) {
      if (std::abs(dz[j]) > lim[j]) scale = std::min(scale, lim[j] / std::abs(dz[j]));
    }
    dz *= scale;
    bool accepted = false;
    for (int half = 0; half < 12; ++half) {
      const double lam = std::ldexp(1.0, -half);
      std::array<double, 3> trial{z[0] + lam * dz[0], z[1] + lam * dz[1], z[2] + lam * dz[2]};
      if (!(trial[2] > 0.0)) continue;
      Section::Eval e;
      try {
        e = sec(trial);
      } catch (const Error& err) {
        if (err.kind() == ErrorKind::LeftChartDomain || err.kind() == ErrorKind::StepTooLarge) continue;
        throw;
      }
      if (e.norm() < cur.norm()) {
        z = trial;
        cur = e;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (z[2] > 50.0 * period0) break;
  }
  jacobian(z);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(J);
  const auto sv = svd.singularValues();
  res.singular = sv[2] <= 1e-5 * sv[0];
  res.z = z;
  res.eval = cur;
  res.iterations = it;
  return res;
}

void d_open(const std::vector<Vec3>& f, double h, std::vector<Vec3>& d1, std::vector<Vec3>* d2) {
  const std::size_t n = f.size();
  d1.assign(n, Vec3{});
  if (d2) d2->assign(n, Vec3{});
  if (n < 5) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 < n ? i + 1 : n - 1;
      d1[i] = (f[b] - f[a]) / ((b - a) * h);
    }
    return;
  }
  const double i12h = 1.0 / (12.0 * h), i12h2 = 1.0 / (12.0 * h * h);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    d1[i] = ((f[i - 2] - f[i + 2]) + 8.0 * (f[i + 1] - f[i - 1])) * i12h;
    if (d2) (*d2)[i] = (16.0 * (f[i - 1] + f[i + 1]) - (f[i - 2] + f[i + 2]) - 30.0 * f[i]) * i12h2;
  }
  auto ends = [&](std::size_t i0, std::size_t i1, std::size_t i2, std::size_t i3, std::size_t i4,
                  double sgn, std::size_t o0, std::size_t o1) {
    const Vec3 &f0 = f[i0], &f1 = f[i1], &f2 = f[i2], &f3 = f[i3], &f4 = f[i4];
    d1[o0] = sgn * (-25.0 * f0 + 48.0 * f1 - 36.0 * f2 + 16.0 * f3 - 3.0 * f4) * i12h;
    d1[o1] = sgn * (-3.0 * f0 - 10.0 * f1 + 18.0 * f2 - 6.0 * f3 + f4) * i12h;
    if (d2) {
      (*d2)[o0] = (35.0 * f0 - 104.0 * f1 + 114.0 * f2 - 56.0 * f3 + 11.0 * f4) * i12h2;
      (*d2)[o1] = (11.0 * f0 - 20.0 * f1 + 6.0 * f2 + 4.0 * f3 - f4) * i12h2;
    }
  };
  ends(0, 1, 2, 3, 4, 1.0, 0, 1);
  ends(n - 1, n - 2, n - 3, n - 4, n - 5, -1.0, n - 1, n - 2);
}

}  // namespace

double GeodesicCurve::parameter_step() const {
  const std::size_t n = samples.size();
  if (closed) return kTwoPi / static_cast<double>(n);
  return n > 1 ? 1.0 / static_cast<double>(n - 1) : 1.0;
}

void sample_derivatives(const Surface& surface, const std::vector<Vec3>& pts, bool closed, double h,
                        std::vector<Vec3>& d1, std::vector<Vec3>* d2) {
  const std::size_t n = pts.size();
  // Periodic chart axes: unwrap so that consecutive samples differ by less
  // than half a period; a closed curve then gains a linear winding term.
  double period[2] = {0.0, 0.0};
  if (surface.is_chart()) {
    const ChartDomain& dom = surface.domain();
    if (dom.u_periodic) period[0] = dom.u_max - dom.u_min;
    if (dom.v_periodic) period[1] = dom.v_max - dom.v_min;
  }
  const bool unwrap = period[0] > 0.0 || period[1] > 0.0;
  std::vector<Vec3> local;
  const std::vector<Vec3>* src = &pts;
  double winding[2] = {0.0, 0.0};
  if (unwrap && n > 0) {
    local = pts;
    for (int a = 0; a < 2; ++a) {
      if (period[a] <= 0.0) continue;
      for (std::size_t i = 1; i < n; ++i) {
        const double d = local[i][a] - local[i - 1][a];
        local[i][a] -= period[a] * std::round(d / period[a]);
      }
      if (closed) {
        winding[a] = period[a] * std::round((local[n - 1][a] - local[0][a]) / period[a]);
        for (std::size_t i = 0; i < n; ++i) local[i][a] -= winding[a] * i / n;
      }
    }
    src = &local;
  }
  if (!closed) {
    d_open(*src, h, d1, d2);
    return;
  }
  if (n < 5) throw Error(ErrorKind::InvalidArgument, "closed curves need at least 5 samples");
  const auto& K = kernels::active();
  std::vector<double> c(n), o(n);
  d1.assign(n, Vec3{});
  if (d2) d2->assign(n, Vec3{});
  for (int axis = 0; axis < 3; ++axis) {
    for (std::size_t i = 0; i < n; ++i) c[i] = (*src)[i][axis];
    K.periodic_d1(c, h, o);
    const double drift = axis < 2 ? winding[axis] / (n * h) : 0.0;
    for (std::size_t i = 0; i < n; ++i) d1[i][axis] = o[i] + drift;
    if (d2) {
      K.periodic_d2(c, h, o);
      for (std::size_t i = 0; i < n; ++i) (*d2)[i][axis] = o[i];
    }
  }
}

GeodesicPath integrate_geodesic(const Surface& surface, const Vec3& p0, const Vec3& v0,
                                double arc_length, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  surface.check_on_surface(p0);
  const double sp = surface.speed(p0, surface.tangent_project(p0, v0));
  if (!(std::abs(sp - 1.0) <= 1e-8)) {
    throw Error(ErrorKind::InvalidArgument, "initial velocity must be a unit tangent vector");
  }
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(arc_length) / step - 1e-9)));
  const double h = arc_length / n;
  GeodesicPath path;
  path.step = std::abs(h);
  path.points.reserve(n + 1);
  path.velocities.reserve(n + 1);
  FlowState st{p0, unit_in_metric(surface, p0, v0), 0.0};
  path.points.push_back(st.x);
  path.velocities.push_back(st.v);
  for (int i = 0; i < n; ++i) {
    st = flow_step(surface, st, h);
    path.points.push_back(st.x);
    path.velocities.push_back(st.v);
  }
  path.max_speed_drift = st.drift;
  return path;
}

GeodesicCurve make_curve(const Surface& surface, std::vector<Vec3> samples, bool closed) {
  GeodesicCurve c;
  c.samples = std::move(samples);
  c.closed = closed;
  c.surface_type = surface.type();
  const double h = c.parameter_step();
  std::vector<Vec3> d1;
  sample_derivatives(surface, c.samples, closed, h, d1, nullptr);
  c.speeds.resize(d1.size());
  c.tangents.resize(d1.size());
  for (std::size_t i = 0; i < d1.size(); ++i) {
    const Vec3 t = surface.tangent_project(c.samples[i], d1[i]);
    c.speeds[i] = surface.speed(c.samples[i], t);
    c.tangents[i] = t / c.speeds[i];
  }
  c.length = curve_length(c, surface);
  return c;
}

GeodesicCurve close_geodesic(const Surface& surface, const GeodesicSeed& seed, const CloseOptions& opt) {
  if (!(seed.period > 0.0)) throw Error(ErrorKind::InvalidArgument, "seed period must be positive");
  if (opt.samples < 16) throw Error(ErrorKind::InvalidArgument, "at least 16 samples required");
  const Vec3 p0 = surface.project(seed.point);
  const Vec3 v0 = unit_in_metric(surface, p0, seed.direction);
  const Section sec{surface, p0, v0, surface.rotate_quarter(p0, v0), opt.samples};

  const NewtonResult nr = newton(sec, {0.0, 0.0, seed.period}, opt, surface.diameter());
  if (!(nr.eval.norm() <= opt.tolerance)) {
    if (nr.singular) {
      throw Error(ErrorKind::DegenerateJacobian,
                  "shooting differential singular, residual " + std::to_string(nr.eval.norm()));
    }
    throw Error(ErrorKind::NoConvergence, "closure residual " + std::to_string(nr.eval.norm()) +
                                              " after " + std::to_string(nr.iterations) + " iterations");
  }
  const double L = nr.z[2];
  const Vec3 x0 = nr.eval.x0, dir = nr.eval.dir;

  for (int m = opt.max_cover; m >= 2; --m) {
    if (loop_mismatch(surface, x0, dir, L / m, opt.samples) < 1e-6) {
      CloseOptions inner = opt;
      inner.max_cover = 1;
      GeodesicCurve prim = close_geodesic(surface, {x0, dir, L / m}, inner);
      prim.primitive = false;
      prim.cover_multiplicity = m;
      prim.iterations += nr.iterations;
      return prim;
    }
  }

  // Forward and backward sweeps from x0 meet with a mismatch of the order of
  // the closure residual; blending them linearly spreads that mismatch over
  // the loop instead of leaving a seam the curvature stencils would amplify.
  const int n = opt.samples;
  const double h = L / n;
  std::vector<FlowState> fwd(n + 1), bwd(n + 1);
  fwd[0] = {x0, dir, 0.0};
  bwd[0] = {x0, -dir, 0.0};
  for (int i = 0; i < n; ++i) {
    fwd[i + 1] = flow_step(surface, fwd[i], h);
    bwd[i + 1] = flow_step(surface, bwd[i], h);
  }
  std::vector<Vec3> pts(n), vel(n);
  for (int i = 0; i < n; ++i) {
    const double w = static_cast<double>(i) / n;
    const FlowState& b = bwd[n - i];
    const Vec3 x = surface.project((1.0 - w) * fwd[i].x + w * b.x);
    pts[i] = x;
    vel[i] = unit_in_metric(surface, x, (1.0 - w) * fwd[i].v - w * b.v);
  }
  GeodesicCurve c = make_curve(surface, std::move(pts), true);
  c.tangents = std::move(vel);
  c.length = L;
  c.closure_residual = nr.eval.norm();
  c.degenerate_shooting = nr.singular;
  c.iterations = nr.iterations;
  return c;
}

double curve_length(const GeodesicCurve& curve, const Surface& surface) {
  const std::size_t n = curve.samples.size();
  if (n < 2) return 0.0;
  const double h = curve.parameter_step();
  std::vector<Vec3> d1;
  sample_derivatives(surface, curve.samples, curve.closed, h, d1, nullptr);
  std::vector<double> sp(n);
  if (!surface.is_chart() && curve.closed) {
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 t = surface.tangent_project(curve.samples[i], d1[i]);
      x[i] = t.x;
      y[i] = t.y;
      z[i] = t.z;
    }
    return h * kernels::active().sum_norm3(x, y, z);
  }
  for (std::size_t i = 0; i < n; ++i) {
    sp[i] = surface.speed(curve.samples[i], surface.tangent_project(curve.samples[i], d1[i]));
  }
  if (curve.closed) {
    double s = 0.0;
    for (double v : sp) s += v;
    return h * s;
  }
  // Composite Simpson; an odd interval count closes with the 3/8 rule.
  const std::size_t m = n - 1;
  if (m == 1) return 0.5 * h * (sp[0] + sp[1]);
  double total = 0.0;
  std::size_t end = m;
  if (m % 2 == 1) {
    end = m - 3;
    total += 3.0 * h / 8.0 * (sp[end] + 3.0 * sp[end + 1] + 3.0 * sp[end + 2] + sp[end + 3]);
  }
  for (std::size_t i = 0; i + 2 <= end; i += 2) total += h / 3.0 * (sp[i] + 4.0 * sp[i + 1] + sp[i + 2]);
  return total;
}

std::vector<double> geodesic_curvature_profile(const GeodesicCurve& curve, const Surface& surface) {
  const std::size_t n = curve.samples.size();
  std::vector<Vec3> d1, d2;
  sample_derivatives(surface, curve.samples, curve.closed, curve.parameter_step(), d1, &d2);
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& x = curve.samples[i];
    Vec3 acc = d2[i];
    const Vec3 v = surface.tangent_project(x, d1[i]);
    if (surface.is_chart()) {
      const Christoffel G = christoffel(surface, x);
      const double w[2] = {v.x, v.y};
      for (int c = 0; c < 2; ++c) {
        double s = 0.0;
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) s += G(c, a, b) * w[a] * w[b];
        }
        acc[c] += s;
      }
    }
    const double sp = surface.speed(x, v);
    k[i] = -surface.inner(x, acc, surface.rotate_quarter(x, v)) / (sp * sp * sp);
  }
  return k;
}

}  // namespace geolab
