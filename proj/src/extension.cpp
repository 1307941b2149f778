#include "geolab/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geolab/cutoff.hpp"
#include "geolab/jacobi.hpp"
#include "geolab/kernels.hpp"

namespace geolab {

PlaneField cross_extension(AxisField u_axis1, AxisField u_axis2) {
  const Vec3 o1 = u_axis1(0.0), o2 = u_axis2(0.0);
  if (norm(o1 - o2) > 1e-12)
    throw Error(ErrorKind::OriginMismatch, "axis values at the crossing differ by " + std::to_string(norm(o1 - o2)));
  return [u1 = std::move(u_axis1), u2 = std::move(u_axis2), o1](double x, double y) { return u1(x) + u2(y) - o1; };
}

AmbientField AmbientField::plus(const AmbientField& other) const {
  AmbientField out = *this;
  auto a = eval_, b = other.eval_;
  out.eval_ = [a, b](const Vec3& x) { return (a ? a(x) : Vec3{}) + (b ? b(x) : Vec3{}); };
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kExpSteps = 64;

long wrap(long i, long n, bool closed) {
  if (closed) return ((i % n) + n) % n;
  return std::clamp(i, 0L, n - 1);
}

// Four-point Lagrange interpolation at a fractional sample index; exact at
// integer indices.
template <class T>
T interp(const std::vector<T>& v, double p, bool closed) {
  const long n = static_cast<long>(v.size());
  if (!closed) p = std::clamp(p, 0.0, static_cast<double>(n - 1));
  const double fl = std::floor(p);
  const double f = p - fl;
  const long i = static_cast<long>(fl);
  if (f == 0.0) return v[static_cast<std::size_t>(wrap(i, n, closed))];
  const double w[4] = {-f * (f - 1.0) * (f - 2.0) / 6.0, (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
                       -(f + 1.0) * f * (f - 2.0) / 2.0, (f + 1.0) * f * (f - 1.0) / 6.0};
  T acc = v[static_cast<std::size_t>(wrap(i - 1, n, closed))] * w[0];
  for (int k = 1; k < 4; ++k) acc = acc + v[static_cast<std::size_t>(wrap(i - 1 + k, n, closed))] * w[k];
  return acc;
}

double arc_per_index(const GeodesicCurve& c) {
  const double n = static_cast<double>(c.samples.size());
  return c.length / (c.closed ? n : n - 1.0);
}

struct ExtensionData {
  Surface surface;
  std::vector<GeodesicCurve> curves;
  NormalProfiles phi;
  std::vector<kernels::SegmentSoA> segs;
  std::vector<CrossingFrame> crossings;
  std::vector<Vec3> origin_value;  // components of X0 + t0 T0 at each crossing
  double eta = 0.0;
  double rho = 0.0;

  struct Flow {
    Vec3 point, velocity;
  };

  // Geodesic from p with unit tangent T for signed arc length s.
  Flow exp_signed(const Vec3& p, const Vec3& T, double s) const {
    if (s == 0.0) return {p, T};
    const GeodesicPath path = integrate_geodesic(surface, p, T, s, std::abs(s) / kExpSteps);
    return {path.points.back(), path.velocities.back()};
  }

  Vec3 exp_tangent(const CrossingFrame& c, double a, double b) const {
    const Vec3 w = a * c.e1 + b * c.e2;
    const double len = std::hypot(a, b);
    if (len == 0.0) return c.point;
    return exp_signed(c.point, w / len, len).point;
  }

  // Normal coordinates of x around the crossing.
  std::array<double, 2> log_map(const CrossingFrame& c, const Vec3& x) const {
    const Vec3 d = x - c.point;
    double a = surface.inner(c.point, d, c.e1), b = surface.inner(c.point, d, c.e2);
    constexpr double eps = 1e-7;
    for (int it = 0; it < 30; ++it) {
      const Vec3 E = exp_tangent(c, a, b);
      const Vec3 R = x - E;
      if (norm(R) <= 1e-15) break;
      const Vec3 Ja = (exp_tangent(c, a + eps, b) - E) / eps;
      const Vec3 Jb = (exp_tangent(c, a, b + eps) - E) / eps;
      const double g11 = dot(Ja, Ja), g12 = dot(Ja, Jb), g22 = dot(Jb, Jb);
      const double r1 = dot(Ja, R), r2 = dot(Jb, R);
      const double det = g11 * g22 - g12 * g12;
      const double da = (g22 * r1 - g12 * r2) / det, db = (g11 * r2 - g12 * r1) / det;
      a += da, b += db;
      if (std::hypot(da, db) <= 1e-15) break;
    }
    return {a, b};
  }

  std::array<Vec3, 2> frame(const CrossingFrame& c, const Vec3& x) const {
    if (surface.is_chart()) return {Vec3{1, 0, 0}, Vec3{0, 1, 0}};
    return {surface.tangent_project(x, c.e1), surface.tangent_project(x, c.e2)};
  }

  Vec3 components(const CrossingFrame& c, const Vec3& x, const Vec3& V) const {
    const auto E = frame(c, x);
    const double g11 = dot(E[0], E[0]), g12 = dot(E[0], E[1]), g22 = dot(E[1], E[1]);
    const double r1 = dot(E[0], V), r2 = dot(E[1], V);
    const double det = g11 * g22 - g12 * g12;
    return {(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det, 0.0};
  }

  // Y_k at arc length s from the crossing along strand k, in frame components.
  Vec3 strand_value(const CrossingFrame& c, int k, double s) const {
    const int id = c.curves[k];
    const GeodesicCurve& g = curves[static_cast<std::size_t>(id)];
    const Flow f = exp_signed(c.point, c.tangents[k], s);
    const Vec3 T = f.velocity / surface.speed(f.point, f.velocity);
    const double ph = interp(phi[static_cast<std::size_t>(id)], c.params[k] + s / arc_per_index(g), g.closed);
    const Vec3 Y = ph * surface.rotate_quarter(f.point, T) + c.tangential[k] * T;
    return components(c, f.point, Y);
  }

  Vec3 crossing_value(std::size_t j, double alpha, double beta, const Vec3& x) const {
    const CrossingFrame& c = crossings[j];
    // w = alpha e1 + beta e2 = a T0 + b T1
    const double t0a = surface.inner(c.point, c.tangents[0], c.e1), t0b = surface.inner(c.point, c.tangents[0], c.e2);
    const double t1a = surface.inner(c.point, c.tangents[1], c.e1), t1b = surface.inner(c.point, c.tangents[1], c.e2);
    const double det = t0a * t1b - t1a * t0b;
    const double a = (alpha * t1b - beta * t1a) / det;
    const double b = (t0a * beta - t0b * alpha) / det;
    const Vec3 U = strand_value(c, 0, a) + strand_value(c, 1, b) - origin_value[j];
    const auto E = frame(c, x);
    return U.x * E[0] + U.y * E[1];
  }

  Vec3 tube_value(const Vec3& x) const {
    double best = kInf;
    std::size_t bc = 0;
    kernels::SegmentHit hit;
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const auto h = kernels::active().nearest_segment(x, segs[c]);
      if (h.dist2 < best) best = h.dist2, bc = c, hit = h;
    }
    const double d = std::sqrt(best);
    if (d >= rho) return {};
    const GeodesicCurve& g = curves[bc];
    const long n = static_cast<long>(g.samples.size());
    const double p = static_cast<double>(hit.index) + hit.param;
    const Vec3 A = g.samples[hit.index];
    const Vec3 B = g.samples[static_cast<std::size_t>(wrap(static_cast<long>(hit.index) + 1, n, g.closed))];
    const Vec3 q = hit.param == 0.0 ? A : (hit.param == 1.0 ? B : (1.0 - hit.param) * A + hit.param * B);
    Vec3 T = surface.tangent_project(q, interp(g.tangents, p, g.closed));
    T = T / surface.speed(q, T);
    const Vec3 X = interp(phi[bc], p, g.closed) * surface.rotate_quarter(q, T);
    Vec3 Z;
    if (surface.is_chart()) {
      const Christoffel G = christoffel(surface, q);
      const Vec3 D = x - q;
      const double dv[2] = {D.x, D.y}, xv[2] = {X.x, X.y};
      Z = X;
      for (int cc = 0; cc < 2; ++cc)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) Z[cc] -= G(cc, a, b) * dv[a] * xv[b];
    } else {
      Z = surface.tangent_project(x, X);
    }
    return plateau(d, 0.5 * rho, rho) * Z;
  }

  bool maybe_in_ball(const CrossingFrame& c, const Vec3& x) const {
    const Vec3 d = x - c.point;
    if (surface.is_chart()) return surface.speed(c.point, d) <= 1.5 * 0.875 * eta;
    return norm(d) < 0.875 * eta;
  }

  Vec3 evaluate(const Vec3& x) const {
    Vec3 out;
    double psum = 0.0;
    for (std::size_t j = 0; j < crossings.size(); ++j) {
      if (!maybe_in_ball(crossings[j], x)) continue;
      const auto w = log_map(crossings[j], x);
      const double psi = plateau(std::hypot(w[0], w[1]), 0.625 * eta, 0.875 * eta);
      if (psi == 0.0) continue;
      out += psi * crossing_value(j, w[0], w[1], x);
      psum += psi;
    }
    if (psum < 1.0) out += (1.0 - psum) * tube_value(x);
    return out;
  }

  CrossingFrame refine_crossing(const VertexRecord& v) const {
    CrossingFrame c;
    Flow ends[2];
    double s[2];
    std::size_t idx[2];
    for (int k = 0; k < 2; ++k) {
      const GeodesicCurve& g = curves[static_cast<std::size_t>(v.strands[k].curve)];
      const long n = static_cast<long>(g.samples.size());
      const double p = v.strands[k].parameter;
      const long i = static_cast<long>(std::lround(p));
      idx[k] = static_cast<std::size_t>(wrap(i, n, g.closed));
      s[k] = (p - static_cast<double>(i)) * arc_per_index(g);
      c.curves[k] = v.strands[k].curve;
    }
    auto at = [&](int k, double sk) {
      const GeodesicCurve& g = curves[static_cast<std::size_t>(c.curves[k])];
      return exp_signed(g.samples[idx[k]], g.tangents[idx[k]], sk);
    };
    constexpr double eps = 1e-8;
    for (int it = 0; it < 30; ++it) {
      ends[0] = at(0, s[0]), ends[1] = at(1, s[1]);
      const Vec3 R = ends[0].point - ends[1].point;
      if (norm(R) <= 1e-15) break;
      const Vec3 J0 = (at(0, s[0] + eps).point - ends[0].point) / eps;
      const Vec3 J1 = -(at(1, s[1] + eps).point - ends[1].point) / eps;
      const double g11 = dot(J0, J0), g12 = dot(J0, J1), g22 = dot(J1, J1);
      const double r1 = dot(J0, R), r2 = dot(J1, R);
      const double det = g11 * g22 - g12 * g12;
      const double d0 = (g22 * r1 - g12 * r2) / det, d1 = (g11 * r2 - g12 * r1) / det;
      s[0] -= d0, s[1] -= d1;
      if (std::hypot(d0, d1) <= 1e-15) {
        ends[0] = at(0, s[0]), ends[1] = at(1, s[1]);
        break;
      }
    }
    c.point = ends[0].point;
    for (int k = 0; k < 2; ++k) {
      const GeodesicCurve& g = curves[static_cast<std::size_t>(c.curves[k])];
      c.tangents[k] = ends[k].velocity / surface.speed(c.point, ends[k].velocity);
      c.params[k] = static_cast<double>(idx[k]) + s[k] / arc_per_index(g);
    }
    c.e1 = c.tangents[0];
    c.e2 = surface.rotate_quarter(c.point, c.e1);
    return c;
  }
};

}  // namespace

AmbientField extend_normal_field(const GeodesicNetwork& network, const NormalProfiles& normal_fields, double delta,
                                 double eta) {
  if (!is_g_plus(network)) throw Error(ErrorKind::NotGPlus, "network has a vertex of order >= 3 or a tangency");
  if (normal_fields.size() != network.curves.size())
    throw Error(ErrorKind::InvalidArgument, "one normal profile per curve is required");
  for (std::size_t c = 0; c < network.curves.size(); ++c) {
    if (normal_fields[c].size() != network.curves[c].samples.size())
      throw Error(ErrorKind::InvalidArgument, "normal profile " + std::to_string(c) + " is not on the sample grid");
  }
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
  if (!(eta > 0.0)) throw Error(ErrorKind::EtaTooLarge, "eta must be positive");

  const auto& vs = network.vertices;
  double limit = kInf;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i + 1; j < vs.size(); ++j) limit = std::min(limit, 0.5 * norm(vs[i].position - vs[j].position));
    for (std::size_t c = 0; c < network.curves.size(); ++c) {
      const bool through = std::any_of(vs[i].strands.begin(), vs[i].strands.end(),
                                       [&](const StrandRef& s) { return s.curve == static_cast<int>(c); });
      if (through) continue;
      const auto segs = kernels::SegmentSoA::from_points(network.curves[c].samples, network.curves[c].closed);
      limit = std::min(limit, 0.5 * std::sqrt(kernels::active().nearest_segment(vs[i].position, segs).dist2));
    }
  }
  if (eta >= limit) {
    throw Error(ErrorKind::EtaTooLarge,
                "eta = " + std::to_string(eta) + " must stay below " + std::to_string(limit));
  }

  auto data = std::make_shared<ExtensionData>();
  data->surface = network.surface;
  data->curves = network.curves;
  data->phi = normal_fields;
  for (const auto& c : network.curves) data->segs.push_back(kernels::SegmentSoA::from_points(c.samples, c.closed));
  const std::size_t m = vs.size();
  data->eta = m > 0 ? std::min(eta, delta / (3.5 * static_cast<double>(m))) : eta;
  const Surface& S = data->surface;

  double rho = kInf;
  for (const auto& v : vs) {
    CrossingFrame c = data->refine_crossing(v);
    Vec3 X[2];
    for (int k = 0; k < 2; ++k) {
      const GeodesicCurve& g = data->curves[static_cast<std::size_t>(c.curves[k])];
      const double ph = interp(data->phi[static_cast<std::size_t>(c.curves[k])], c.params[k], g.closed);
      X[k] = ph * S.rotate_quarter(c.point, c.tangents[k]);
    }
    // t0 T0 - t1 T1 = X1 - X0 in the (e1, e2) basis
    const Vec3 rhs = X[1] - X[0];
    const double a11 = S.inner(c.point, c.tangents[0], c.e1), a21 = S.inner(c.point, c.tangents[0], c.e2);
    const double a12 = -S.inner(c.point, c.tangents[1], c.e1), a22 = -S.inner(c.point, c.tangents[1], c.e2);
    const double r1 = S.inner(c.point, rhs, c.e1), r2 = S.inner(c.point, rhs, c.e2);
    const double det = a11 * a22 - a12 * a21;
    c.tangential = {(r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det};
    const double cosang = std::min(1.0, std::abs(S.inner(c.point, c.tangents[0], c.tangents[1])));
    rho = std::min(rho, 0.9 * 0.625 * data->eta * std::sin(0.5 * std::acos(cosang)));
    data->origin_value.push_back(data->components(c, c.point, X[0] + c.tangential[0] * c.tangents[0]));
    data->crossings.push_back(c);
  }

  // tubes stay disjoint away from the crossing balls and inside the normal
  // injectivity range
  double kmax = 0.0, sep = kInf;
  for (std::size_t c = 0; c < data->curves.size(); ++c) {
    const auto& g = data->curves[c];
    for (std::size_t i = 0; i < g.samples.size(); ++i) {
      const Vec3& p = g.samples[i];
      if (i % 16 == 0) kmax = std::max(kmax, gauss_curvature(S, p));
      bool in_ball = false;
      for (const auto& cr : data->crossings) in_ball = in_ball || norm(p - cr.point) < 0.625 * data->eta;
      if (in_ball) continue;
      for (std::size_t o = 0; o < data->curves.size(); ++o) {
        if (o == c) continue;
        sep = std::min(sep, std::sqrt(kernels::active().nearest_segment(p, data->segs[o]).dist2));
      }
    }
  }
  if (kmax > 0.0) rho = std::min(rho, 0.2 * kPi / std::sqrt(kmax));
  rho = std::min(rho, 0.45 * sep);
  if (!std::isfinite(rho)) rho = 0.1 * S.diameter();
  data->rho = rho;

  AmbientField field([data](const Vec3& x) { return data->evaluate(x); },
                     "tubes of radius rho around the curves; balls of radius 7 eta / 8 at the crossings");
  field.eta = data->eta;
  field.delta = delta;
  field.tube_radius = rho;
  field.crossings = data->crossings;
  // Curve length inside the cutoff balls; the normal radius is linear in arc
  // length along a strand through the centre, so boundary crossings are
  // interpolated within each segment.
  const double R = 0.875 * data->eta;
  for (const auto& g : data->curves) {
    const double ds = arc_per_index(g);
    const std::size_t n = g.samples.size();
    for (std::size_t j = 0; j < data->crossings.size(); ++j) {
      std::vector<double> rad(n, kInf);
      for (std::size_t i = 0; i < n; ++i) {
        const Vec3 d = g.samples[i] - data->crossings[j].point;
        if (S.speed(data->crossings[j].point, d) > 2.0 * R) continue;
        const auto w = data->log_map(data->crossings[j], g.samples[i]);
        rad[i] = std::hypot(w[0], w[1]);
      }
      const std::size_t segs = g.closed ? n : n - 1;
      for (std::size_t i = 0; i < segs; ++i) {
        const double r0 = rad[i], r1 = rad[(i + 1) % n];
        if (r0 < R && r1 < R) {
          field.support_measure += ds;
        } else if (r0 < R && std::isfinite(r1)) {
          field.support_measure += ds * (R - r0) / (r1 - r0);
        } else if (r1 < R && std::isfinite(r0)) {
          field.support_measure += ds * (R - r1) / (r0 - r1);
        }
      }
    }
  }
  return field;
}

double flowed_length(const GeodesicNetwork& network, const AmbientField& field, double tau, const FlowOptions& opt) {
  const Surface& S = network.surface;
  const int n = std::max(1, opt.substeps);
  const double dt = tau / n;
  auto settle = [&](Vec3 x) {
    if (S.is_chart()) {
      if (!S.domain().contains(x.x, x.y)) throw Error(ErrorKind::FlowLeftSurface, "flow left the chart domain");
      return Vec3{x.x, x.y, 0.0};
    }
    const Vec3 g = S.level_set_function().gradient(x);
    const double drift = std::abs(S.level_value(x)) / norm(g);
    if (drift > opt.surface_tolerance)
      throw Error(ErrorKind::FlowLeftSurface, "flow drifted " + std::to_string(drift) + " off the surface");
    return S.project(x);
  };
  double total = 0.0;
  for (const auto& c : network.curves) {
    std::vector<Vec3> pts = c.samples;
    if (tau != 0.0) {
      for (Vec3& x : pts) {
        for (int k = 0; k < n; ++k) {
          const Vec3 k1 = field.evaluate(x);
          const Vec3 k2 = field.evaluate(settle(x + 0.5 * dt * k1));
          const Vec3 k3 = field.evaluate(settle(x + 0.5 * dt * k2));
          const Vec3 k4 = field.evaluate(settle(x + dt * k3));
          x = settle(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        }
      }
    }
    total += make_curve(S, std::move(pts), c.closed).length;
  }
  return total;
}

VariationReport verify_second_variation_match(const GeodesicNetwork& network, const NormalProfiles& normal_fields,
                                              const AmbientField& field, double flow_step, const FlowOptions& opt) {
  if (!(flow_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "flow step must be positive");
  if (normal_fields.size() != network.curves.size())
    throw Error(ErrorKind::InvalidArgument, "one normal profile per curve is required");
  VariationReport r;
  for (std::size_t c = 0; c < network.curves.size(); ++c)
    r.Q_form += second_variation(network.curves[c], normal_fields[c], normal_fields[c], network.surface);
  const double l0 = flowed_length(network, field, 0.0, opt);
  const double lp = flowed_length(network, field, flow_step, opt);
  const double lm = flowed_length(network, field, -flow_step, opt);
  r.Q_flow = (lp - 2.0 * l0 + lm) / (flow_step * flow_step);
  r.total_length = l0;
  r.rel_error = std::abs(r.Q_flow - r.Q_form) / std::max(std::abs(r.Q_form), l0);
  r.support_measure = field.support_measure;
  r.delta = field.delta;
  r.eta = field.eta;
  return r;
}

}  // namespace geolab
