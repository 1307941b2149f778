#include "geolab/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geolab/cutoff.hpp"
#include "geolab/kernels.hpp"

namespace geolab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quintic in x = (s - a) / L with prescribed value, slope and second
// derivative (with respect to s) at both ends.
std::array<double, 6> quintic_hermite(double L, double y0, double d0, double dd0, double y1, double d1,
                                      double dd1) {
  const double a = L * d0, b = L * L * dd0, c = L * d1, e = L * L * dd1;
  return {y0,
          a,
          0.5 * b,
          -10.0 * y0 - 6.0 * a - 1.5 * b + 0.5 * e - 4.0 * c + 10.0 * y1,
          15.0 * y0 + 8.0 * a + 1.5 * b - e + 7.0 * c - 15.0 * y1,
          -6.0 * y0 - 3.0 * a - 0.5 * b + 0.5 * e - 3.0 * c + 6.0 * y1};
}

double eval_poly(const std::array<double, 6>& c, double x, double L, int k) {
  double v = 0.0;
  if (k == 0) {
    for (int i = 5; i >= 0; --i) v = v * x + c[i];
    return v;
  }
  if (k == 1) {
    for (int i = 5; i >= 1; --i) v = v * x + i * c[i];
    return v / L;
  }
  for (int i = 5; i >= 2; --i) v = v * x + i * (i - 1) * c[i];
  return v / (L * L);
}

double point_to_curve(const Vec3& p, const kernels::SegmentSoA& segs) {
  return std::sqrt(kernels::active().nearest_segment(p, segs).dist2);
}

double domain_margin(const Surface& surface, const Vec3& x) {
  const ChartDomain& d = surface.domain();
  double m = kInf;
  if (!d.u_periodic) m = std::min({m, x.x - d.u_min, d.u_max - x.x});
  if (!d.v_periodic) m = std::min({m, x.y - d.v_min, d.v_max - x.y});
  return m;
}

}  // namespace

double DetourCurve::graph(double s, int k) const {
  if (offset == 0.0 || s <= s0 || s >= s3) return 0.0;
  if (s < s1) return eval_poly(rho, (s - s0) / (s1 - s0), s1 - s0, k);
  if (s > s2) return eval_poly(tau, (s - s2) / (s3 - s2), s3 - s2, k);
  // sigma: quintic Hermite between geodesic nodes
  auto it = std::upper_bound(sig_s.begin(), sig_s.end(), s);
  std::size_t j = static_cast<std::size_t>(std::max<long>(1, it - sig_s.begin()));
  j = std::min(j, sig_s.size() - 1);
  const double L = sig_s[j] - sig_s[j - 1];
  const auto c = quintic_hermite(L, sig_v[j - 1], sig_dv[j - 1], sig_ddv[j - 1], sig_v[j], sig_dv[j], sig_ddv[j]);
  return eval_poly(c, (s - sig_s[j - 1]) / L, L, k);
}

double DetourCurve::curvature(const Surface& surface, double s) const {
  const Vec3 c = point(s), v = d1(s), a = d2(s);
  const Christoffel G = christoffel(surface, c);
  const double w[2] = {v.x, v.y};
  Vec3 acc = a;
  for (int i = 0; i < 2; ++i) {
    double t = 0.0;
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) t += G(i, p, q) * w[p] * w[q];
    acc[i] += t;
  }
  const double sp = surface.speed(c, v);
  return -surface.inner(c, acc, surface.rotate_quarter(c, v)) / (sp * sp * sp);
}

double working_ball_radius(const GeodesicNetwork& network, const VertexRecord& vertex, double cap) {
  const Surface& surface = network.surface;
  const Vec3 O = vertex.position;
  double kmax = 0.0, shortest_loop = kInf;
  for (const auto& c : network.curves) {
    const std::size_t stride = std::max<std::size_t>(1, c.samples.size() / 64);
    for (std::size_t i = 0; i < c.samples.size(); i += stride)
      kmax = std::max(kmax, gauss_curvature(surface, c.samples[i]));
    if (c.closed) shortest_loop = std::min(shortest_loop, c.length);
  }
  double inj = kmax > 0.0 ? kPi / std::sqrt(kmax) : kInf;
  inj = std::min(inj, 0.5 * shortest_loop);

  double limit = std::min(cap, 0.2 * inj);
  for (const auto& w : network.vertices) {
    const double d = norm(w.position - O);
    if (d > network.clustering_radius) limit = std::min(limit, 0.5 * d);
  }
  for (std::size_t i = 0; i < network.curves.size(); ++i) {
    const auto& c = network.curves[i];
    const bool through = std::any_of(vertex.strands.begin(), vertex.strands.end(),
                                     [&](const StrandRef& s) { return s.curve == static_cast<int>(i); });
    if (!through) {
      limit = std::min(limit, 0.5 * point_to_curve(O, kernels::SegmentSoA::from_points(c.samples, c.closed)));
    } else if (!c.closed) {
      limit = std::min({limit, norm(c.samples.front() - O), norm(c.samples.back() - O)});
    }
  }
  if (surface.is_chart()) limit = std::min(limit, domain_margin(surface, O));
  return 0.9 * limit;
}

std::shared_ptr<const DetourCurve> build_detour(const Surface& surface, const GeodesicNetwork& network,
                                                const VertexRecord& vertex, int strand_id, double offset_t,
                                                const DetourOptions& options) {
  if (!surface.is_chart()) throw Error(ErrorKind::InvalidArgument, "detours are built in chart surfaces");
  if (strand_id < 0 || strand_id >= static_cast<int>(network.curves.size()))
    throw Error(ErrorKind::InvalidArgument, "strand id out of range");
  const bool listed = std::any_of(vertex.strands.begin(), vertex.strands.end(),
                                  [&](const StrandRef& s) { return s.curve == strand_id; });
  if (!listed) throw Error(ErrorKind::VertexNotOnStrand, "curve " + std::to_string(strand_id) + " misses the vertex");

  const GeodesicCurve& strand = network.curves[static_cast<std::size_t>(strand_id)];
  if (strand.closed) throw Error(ErrorKind::InvalidArgument, "detoured strands must be open chart lines");
  const Vec3 A = strand.samples.front(), B = strand.samples.back();
  const double span = norm(B - A);
  auto det = std::make_shared<DetourCurve>();
  det->dir = (B - A) / span;
  det->normal = {-det->dir.y, det->dir.x, 0.0};
  for (const Vec3& p : strand.samples) {
    if (std::abs(dot(p - A, det->normal)) > 1e-9 * span + 1e-12)
      throw Error(ErrorKind::InvalidArgument, "detoured strand is not a straight chart segment");
  }
  const double off_line = dot(vertex.position - A, det->normal);
  const double tol = network.clustering_radius > 0.0 ? network.clustering_radius : 1e-6 * span;
  if (std::abs(off_line) > tol) throw Error(ErrorKind::VertexNotOnStrand, "vertex is off the strand line");
  det->origin = vertex.position - off_line * det->normal;
  det->strand = strand_id;

  const double r = options.ball_radius > 0.0 ? options.ball_radius
                                             : working_ball_radius(network, vertex, options.max_ball_radius);
  det->radius = r;
  det->offset = offset_t;
  det->s0 = -0.875 * r, det->s1 = -0.5 * r, det->s2 = 0.5 * r, det->s3 = 0.875 * r;
  if (std::abs(offset_t) > 0.25 * r)
    throw Error(ErrorKind::OffsetTooLarge, "offset exceeds a quarter of the working-ball radius " + std::to_string(r));
  const double sa = dot(A - det->origin, det->dir), sb = dot(B - det->origin, det->dir);
  if (sa > det->s0 || sb < det->s3) throw Error(ErrorKind::InvalidArgument, "working ball exceeds the strand");
  if (offset_t == 0.0) {
    det->curve = strand;
    return det;
  }

  // sigma: shoot the geodesic from p_t to q, unknowns (direction angle, length)
  const Vec3 pt = det->origin + det->s1 * det->dir + offset_t * det->normal;
  const Vec3 q = det->origin + det->s2 * det->dir;
  const Vec3 e1 = (q - pt) / surface.speed(pt, q - pt);
  const Vec3 e2 = surface.rotate_quarter(pt, e1);
  const Vec3 mid = 0.5 * (pt + q);
  double alpha = 0.0, len = surface.speed(mid, q - pt);
  constexpr int kSteps = 512;
  auto shoot = [&](double a, double l) {
    return integrate_geodesic(surface, pt, std::cos(a) * e1 + std::sin(a) * e2, l, l / kSteps);
  };
  GeodesicPath path;
  bool converged = false;
  for (int it = 0; it < 30 && !converged; ++it) {
    path = shoot(alpha, len);
    const Vec3 R = path.points.back() - q;
    if (norm(R) <= 1e-13 * r) {
      converged = true;
      break;
    }
    const double ea = 1e-7, el = 1e-7 * len;
    const Vec3 Ja = (shoot(alpha + ea, len).points.back() - shoot(alpha - ea, len).points.back()) / (2.0 * ea);
    const Vec3 Jl = (shoot(alpha, len + el).points.back() - shoot(alpha, len - el).points.back()) / (2.0 * el);
    const double detJ = Ja.x * Jl.y - Ja.y * Jl.x;
    if (std::abs(detJ) < 1e-300) throw Error(ErrorKind::DegenerateJacobian, "sigma shooting");
    alpha -= (Jl.y * R.x - Jl.x * R.y) / detJ;
    len -= (-Ja.y * R.x + Ja.x * R.y) / detJ;
  }
  if (!converged) throw Error(ErrorKind::NoConvergence, "sigma shooting did not converge");

  const std::size_t n = path.points.size();
  det->sig_s.resize(n), det->sig_v.resize(n), det->sig_dv.resize(n), det->sig_ddv.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 c = path.points[i], v = path.velocities[i];
    const Vec3 a = surface.geodesic_acceleration(c, v);
    const double sd = dot(v, det->dir), ud = dot(v, det->normal);
    const double sdd = dot(a, det->dir), udd = dot(a, det->normal);
    if (sd <= 0.0) throw Error(ErrorKind::OffsetTooLarge, "sigma is not a graph over the strand");
    det->sig_s[i] = dot(c - det->origin, det->dir);
    det->sig_v[i] = dot(c - det->origin, det->normal);
    det->sig_dv[i] = ud / sd;
    det->sig_ddv[i] = (udd * sd - ud * sdd) / (sd * sd * sd);
  }
  det->sig_s.front() = det->s1, det->sig_v.front() = offset_t;
  det->sig_s.back() = det->s2, det->sig_v.back() = 0.0;

  det->rho = quintic_hermite(det->s1 - det->s0, 0.0, 0.0, 0.0, offset_t, det->sig_dv.front(), det->sig_ddv.front());
  det->tau = quintic_hermite(det->s3 - det->s2, 0.0, det->sig_dv.back(), det->sig_ddv.back(), 0.0, 0.0, 0.0);

  const double spacing = (det->s3 - det->s0) / options.min_bridge_samples;
  const std::size_t count =
      std::max(strand.samples.size(), static_cast<std::size_t>(std::ceil((sb - sa) / spacing)) + 1);
  std::vector<Vec3> pts(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = sa + (sb - sa) * static_cast<double>(i) / static_cast<double>(count - 1);
    pts[i] = det->point(s);
  }
  pts.front() = A, pts.back() = B;
  det->curve = make_curve(surface, std::move(pts), false);
  return det;
}

ConformalFactorField::ConformalFactorField(std::shared_ptr<const DetourCurve> detour, Surface base, double d0)
    : detour_(std::move(detour)), base_(std::move(base)), d0_(d0), margin_(0.05 * detour_->radius) {
  const DetourCurve& D = *detour_;
  constexpr int kSamples = 400;
  k_samples_.resize(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) {
    const double s = D.s0 + (D.s3 - D.s0) * i / kSamples;
    k_samples_[static_cast<std::size_t>(i)] = D.offset == 0.0 || D.on_sigma(s) ? 0.0 : D.curvature(base_, s);
  }
  for (int i = 0; i <= kSamples; ++i) {
    const double s = D.s0 + (D.s3 - D.s0) * i / kSamples;
    max_slope_ = std::max(max_slope_, std::abs(D.graph(s, 1)));
  }
}

std::pair<double, double> ConformalFactorField::fermi(const Vec3& x) const {
  const DetourCurve& D = *detour_;
  const Vec3 rel = x - D.origin;
  double s = dot(rel, D.dir);
  for (int it = 0; it < 50; ++it) {
    const Vec3 c = D.point(s), c1 = D.d1(s), c2 = D.d2(s);
    const double g = dot(c - x, c1);
    const double gs = dot(c1, c1) + dot(c - x, c2);
    const double step = g / gs;
    s -= step;
    if (std::abs(step) <= 1e-16 * D.radius) break;
  }
  const Vec3 c1 = D.d1(s);
  const Vec3 ne = Vec3{-c1.y, c1.x, 0.0} / norm(c1);
  return {s, dot(x - D.point(s), ne)};
}

double ConformalFactorField::profile(double s) const {
  const DetourCurve& D = *detour_;
  if (D.offset == 0.0 || s <= D.s0 || s >= D.s3 || D.on_sigma(s)) return 0.0;
  const Vec3 c = D.point(s), c1 = D.d1(s);
  const Vec3 ne = Vec3{-c1.y, c1.x, 0.0} / norm(c1);
  const Vec3 ng = base_.rotate_quarter(c, c1) / base_.speed(c, c1);
  const double lambda = dot(ne, ng);
  const double outside = std::max({0.0, D.s0 - s, s - D.s3});
  const double psi = 1.0 - smooth_step(outside / margin_);
  return D.curvature(base_, s) * psi / lambda;
}

bool ConformalFactorField::quick_reject(const Vec3& x) const {
  const DetourCurve& D = *detour_;
  const Vec3 rel = x - D.origin;
  const double a = dot(rel, D.dir);
  if (a < D.s0 - 2.0 * d0_ || a > D.s3 + 2.0 * d0_) return true;
  const double b = dot(rel, D.normal);
  return std::abs(b - D.graph(a, 0)) > 1.5 * d0_ * std::sqrt(1.0 + max_slope_ * max_slope_);
}

double ConformalFactorField::value(const Vec3& x) const {
  if (detour_->offset == 0.0 || quick_reject(x)) return 0.0;
  const auto [s, e] = fermi(x);
  if (std::abs(e) >= d0_) return 0.0;
  const double q = profile(s);
  if (q == 0.0) return 0.0;
  return -plateau(e, 0.5 * d0_, d0_) * e * q;
}

// Exact gradient from the Fermi data: grad e = n_e and grad s* = c' / (|c'|^2 + <c - x, c''>).
Vec3 ConformalFactorField::gradient(const Vec3& x) const {
  if (detour_->offset == 0.0 || quick_reject(x)) return {};
  const DetourCurve& D = *detour_;
  const auto [s, e] = fermi(x);
  if (std::abs(e) >= d0_) return {};
  const double q = profile(s);
  const double h = 1e-6 * D.radius;
  const double dq = (profile(s + h) - profile(s - h)) / (2.0 * h);
  if (q == 0.0 && dq == 0.0) return {};
  const double w = 0.5 * d0_;
  const double chi = plateau(e, w, d0_);
  const double xe = (std::abs(e) - w) / w;
  double dchi = 0.0;
  if (xe > 0.0 && xe < 1.0) {
    const double hs = 1e-7;
    dchi = -(smooth_step(xe + hs) - smooth_step(xe - hs)) / (2.0 * hs) / w * (e < 0.0 ? -1.0 : 1.0);
  }
  const Vec3 c = D.point(s), c1 = D.d1(s), c2 = D.d2(s);
  const Vec3 ne = Vec3{-c1.y, c1.x, 0.0} / norm(c1);
  const Vec3 ds = c1 / (dot(c1, c1) + dot(c - x, c2));
  return -((dchi * e + chi) * q) * ne - (chi * e * dq) * ds;
}

double max_admissible_d0(const DetourCurve& detour, const Surface& surface, const GeodesicNetwork& network) {
  (void)surface;
  const DetourCurve& D = detour;
  double dist = kInf, kmax = 0.0;
  std::vector<kernels::SegmentSoA> others;
  for (std::size_t i = 0; i < network.curves.size(); ++i) {
    if (static_cast<int>(i) == D.strand) continue;
    others.push_back(kernels::SegmentSoA::from_points(network.curves[i].samples, network.curves[i].closed));
  }
  constexpr int kSamples = 400;
  for (int piece = 0; piece < 2; ++piece) {
    const double a = piece == 0 ? D.s0 : D.s2, b = piece == 0 ? D.s1 : D.s3;
    for (int i = 0; i <= kSamples; ++i) {
      const double s = a + (b - a) * i / kSamples;
      const Vec3 p = D.point(s);
      for (const auto& o : others) dist = std::min(dist, point_to_curve(p, o));
      const double u1 = D.graph(s, 1), u2 = D.graph(s, 2);
      kmax = std::max(kmax, std::abs(u2) / std::pow(1.0 + u1 * u1, 1.5));
    }
  }
  double limit = 0.5 * dist;
  if (kmax > 0.0) limit = std::min(limit, 0.5 / kmax);
  // the tube around the bridges stays inside the working ball
  limit = std::min(limit, std::sqrt(D.radius * D.radius - D.s0 * D.s0) - std::abs(D.offset));
  return limit;
}

std::shared_ptr<const ConformalFactorField> conformal_factor_for(std::shared_ptr<const DetourCurve> detour,
                                                                 const Surface& surface,
                                                                 const GeodesicNetwork& network, double d0) {
  const double limit = max_admissible_d0(*detour, surface, network);
  if (d0 <= 0.0) {
    d0 = std::min(limit, 0.1 * detour->radius);
  } else if (d0 > limit) {
    throw Error(ErrorKind::D0TooLarge,
                "d0 = " + std::to_string(d0) + " exceeds the admissible " + std::to_string(limit));
  }
  if (d0 <= 0.0) throw Error(ErrorKind::D0TooLarge, "no admissible tube around the bridges");
  return std::make_shared<ConformalFactorField>(std::move(detour), surface, d0);
}

SplitResult split_vertex(const Surface& surface, const GeodesicNetwork& network, std::size_t vertex_index,
                         const SplitOptions& options) {
  if (vertex_index >= network.vertices.size()) throw Error(ErrorKind::InvalidArgument, "vertex index out of range");
  const VertexRecord& v = network.vertices[vertex_index];
  if (v.order < 3) throw Error(ErrorKind::NotReducible, "vertex has order " + std::to_string(v.order));
  int strand = network.curves.size();
  for (const auto& s : v.strands) strand = std::min(strand, s.curve);

  const double r = working_ball_radius(network, v, options.max_ball_radius);
  DetourOptions dopt;
  dopt.ball_radius = r;
  auto detour = build_detour(surface, network, v, strand, options.offset_fraction * r, dopt);
  auto factor = conformal_factor_for(detour, surface, network, 0.0);

  SplitResult out;
  out.surface = surface.with_conformal_factor(factor);
  out.factors.push_back(factor);
  std::vector<GeodesicCurve> curves = network.curves;
  curves[static_cast<std::size_t>(strand)] = detour->curve;
  DetectOptions dopts;
  dopts.clustering_radius = std::min(network.clustering_radius, options.clustering_fraction * r);
  dopts.angle_threshold = network.angle_threshold;
  out.network.surface = out.surface;
  out.network.vertices = detect_vertices(out.surface, curves, dopts);
  out.network.curves = std::move(curves);
  out.network.clustering_radius = dopts.clustering_radius;
  out.network.angle_threshold = dopts.angle_threshold;

  SplitStep step;
  step.vertex = v.position;
  step.order_before = v.order;
  step.strand_id = strand;
  step.ball_radius = r;
  step.offset_t = detour->offset;
  step.d0 = factor->d0();
  const DetourCurve& D = *detour;
  for (double k : factor->curvature_samples()) step.curvature_residual_before = std::max(step.curvature_residual_before, std::abs(k));
  constexpr int kS = 200, kE = 10;
  for (int i = 0; i <= kS; ++i) {
    const double s = D.s0 + (D.s3 - D.s0) * i / kS;
    step.curvature_residual_after = std::max(step.curvature_residual_after, std::abs(D.curvature(out.surface, s)));
    const Vec3 c1 = D.d1(s);
    const Vec3 ne = Vec3{-c1.y, c1.x, 0.0} / norm(c1);
    for (int j = -kE; j <= kE; ++j) {
      const Vec3 x = D.point(s) + (factor->d0() * j / kE) * ne;
      step.max_f = std::max(step.max_f, std::abs(factor->value(x)));
    }
  }
  for (const auto& w : out.network.vertices) step.vertex_orders_after.push_back(w.order);
  out.transcript.push_back(std::move(step));
  return out;
}

SplitResult reduce_vertex(const Surface& surface, const GeodesicNetwork& network, std::size_t vertex_index,
                          const SplitOptions& options) {
  if (vertex_index >= network.vertices.size()) throw Error(ErrorKind::InvalidArgument, "vertex index out of range");
  if (network.vertices[vertex_index].order < 3)
    throw Error(ErrorKind::NotReducible, "vertex has order " + std::to_string(network.vertices[vertex_index].order));
  const Vec3 O = network.vertices[vertex_index].position;
  SplitResult acc;
  acc.surface = surface;
  acc.network = network;
  for (int round = 0; round < 64; ++round) {
    std::size_t best = acc.network.vertices.size();
    double best_d = kInf;
    for (std::size_t i = 0; i < acc.network.vertices.size(); ++i) {
      const double d = norm(acc.network.vertices[i].position - O);
      if (d < best_d) best_d = d, best = i;
    }
    if (best == acc.network.vertices.size() || best_d > 2.0 * acc.network.clustering_radius ||
        acc.network.vertices[best].order < 3)
      break;
    SplitResult next = split_vertex(acc.surface, acc.network, best, options);
    acc.surface = std::move(next.surface);
    acc.network = std::move(next.network);
    acc.transcript.insert(acc.transcript.end(), next.transcript.begin(), next.transcript.end());
    acc.factors.insert(acc.factors.end(), next.factors.begin(), next.factors.end());
  }
  return acc;
}

}  // namespace geolab
