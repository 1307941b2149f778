// Acceptance suite: one PASS/FAIL line per criterion. Runtime limits are part
// of each criterion. Usage: acceptance [criterion numbers...]
#include <boost/math/special_functions/ellint_2.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "geolab/extension.hpp"
#include "geolab/jacobi.hpp"
#include "geolab/report.hpp"
#include "geolab/splitting.hpp"
#include "geolab/widths.hpp"

using namespace geolab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checks {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  Outcome done() const { return {pass_, pass_ ? notes_ : failures_ + (notes_.empty() ? "" : " | " + notes_)}; }

 private:
  bool pass_ = true;
  std::string failures_, notes_;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

GeodesicCurve equator(const Surface& s) { return close_geodesic(s, {{1, 0, 0}, {0, 1, 0}, kTwoPi}); }

// ---- 1 ------------------------------------------------------------------
Outcome curvature() {
  Checks c;
  double worst = 0.0;
  for (double k : {2.0, 4.0, 10.0}) {
    const Surface s = make_mk(k, 1.0);
    for (int i = 0; i < 64; ++i) {
      const double t = kTwoPi * i / 64;
      worst = std::max(worst, std::abs(gauss_curvature(s, {std::cos(t), std::sin(t), 0.0}) - 1.0 / k));
    }
  }
  c.require(worst <= 1e-8, "max |K - 1/k| = " + sci(worst));
  c.note("max |K - 1/k| = " + sci(worst));
  return c.done();
}

// ---- 2 ------------------------------------------------------------------
Outcome closure() {
  Checks c;
  const Surface s = make_mk(4.0, 1.0);
  // start off the equator and tilted; shooting must come back to it
  const Vec3 p = s.project({1.0, 0.0, 0.02});
  const Vec3 v = s.tangent_project(p, {0.0, 1.0, 0.03});
  const GeodesicCurve g = close_geodesic(s, {p, v, kTwoPi + 0.05});
  double zmax = 0.0;
  for (const Vec3& q : g.samples) zmax = std::max(zmax, std::abs(q.z));
  c.require(g.closure_residual <= 1e-10, "residual " + sci(g.closure_residual));
  c.require(std::abs(g.length - kTwoPi) <= 1e-8, "length error " + sci(g.length - kTwoPi));
  c.require(zmax <= 1e-6, "max |x3| " + sci(zmax));
  c.note("residual " + sci(g.closure_residual) + ", |L - 2pi| " + sci(std::abs(g.length - kTwoPi)) +
         ", max |x3| " + sci(zmax));
  return c.done();
}

// ---- 3 ------------------------------------------------------------------
Outcome spectra() {
  Checks c;
  const int N = 1024;
  // analytic family on the equator: n^2 - 1/k, each n >= 1 twice
  for (double k : {4.0, 16.0}) {
    const Surface s = make_mk(k, 1.0);
    const GeodesicCurve g = equator(s);
    const SpectrumReport r = jacobi_spectrum(g, s, 1, N);
    const double h = g.length / N;
    std::vector<double> expect{-1.0 / k};
    for (int n = 1; expect.size() < 6; ++n) {
      expect.push_back(n * n - 1.0 / k);
      expect.push_back(n * n - 1.0 / k);
    }
    double worst = 0.0;
    for (int i = 0; i < 6; ++i) worst = std::max(worst, std::abs(r.eigenvalues[static_cast<std::size_t>(i)] - expect[static_cast<std::size_t>(i)]));
    c.require(worst <= 5 * h * h, "k=" + std::to_string(int(k)) + " eigen error " + sci(worst));
    c.note("k=" + std::to_string(int(k)) + " err " + sci(worst) + " (5h^2 " + sci(5 * h * h) + ")");
  }
  {
    const Surface s = make_mk(4.0, 1.0);
    const SpectrumReport r = jacobi_spectrum(equator(s), s, 1, N);
    c.require(r.index == 1 && r.nullity == 0, "k=4 m=1 index/nullity " + std::to_string(r.index) + "/" +
                                                  std::to_string(r.nullity));
  }
  {
    const Surface s = make_mk(16.0, 1.0);
    const SpectrumReport r = jacobi_spectrum(equator(s), s, 4, 4 * N);
    c.require(r.nullity == 2, "k=16 m=4 nullity " + std::to_string(r.nullity));
  }
  {
    const Surface s = make_mk(9.0, 2.0);
    const SpectrumReport r = jacobi_spectrum(equator(s), s, 1, N);
    c.require(r.index == 0 && r.nullity == 1, "mu=2 index/nullity " + std::to_string(r.index) + "/" +
                                                  std::to_string(r.nullity));
  }
  {
    const Surface s = make_sphere();
    const SpectrumReport r = jacobi_spectrum(equator(s), s, 1, N);
    c.require(r.index == 1 && r.nullity == 2, "great circle index/nullity " + std::to_string(r.index) + "/" +
                                                  std::to_string(r.nullity));
  }
  c.note("index/nullity cases ok");
  return c.done();
}

// ---- 4 ------------------------------------------------------------------
GeodesicCurve sampled_circle(const Surface& s, int n) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) pts.push_back({std::cos(kTwoPi * i / n), std::sin(kTwoPi * i / n), 0.0});
  return make_curve(s, pts, true);
}

Outcome second_variation_match() {
  Checks c;
  {
    const Surface s = make_sphere();
    const auto net = make_network(s, {sampled_circle(s, 2048)});
    const NormalProfiles phi{std::vector<double>(2048, 1.0)};
    const AmbientField X = extend_normal_field(net, phi, 0.1, 0.1);
    const VariationReport r = verify_second_variation_match(net, phi, X, 1e-2);
    const double rel = std::abs(r.Q_flow - r.Q_form) / std::abs(r.Q_form);
    c.require(rel <= 1e-3, "great circle rel error " + sci(rel));
    c.note("great circle rel " + sci(rel));

    const AmbientField spin([](const Vec3& x) { return Vec3{-x.y, x.x, 0.0}; }, "rotation about x3");
    const VariationReport t = verify_second_variation_match(net, phi, X.plus(spin), 1e-2);
    const double drift = std::abs(t.Q_flow - r.Q_flow) / std::abs(r.Q_flow);
    c.require(drift <= 1e-4, "tangential change " + sci(drift));
    c.note("tangential change " + sci(drift));
  }
  {
    const Surface s = make_mk(9.0, 2.0);
    const auto net = make_network(s, {sampled_circle(s, 2048)});
    const NormalProfiles phi{std::vector<double>(2048, 1.0)};
    const AmbientField X = extend_normal_field(net, phi, 0.1, 0.1);
    const VariationReport r = verify_second_variation_match(net, phi, X, 1e-2);
    const double err = std::abs(r.Q_flow - r.Q_form);
    c.require(err <= 1e-4 * r.total_length, "mu=2 abs error " + sci(err));
    c.note("mu=2 abs error " + sci(err) + " (limit " + sci(1e-4 * r.total_length) + ")");
  }
  return c.done();
}

// ---- 5 ------------------------------------------------------------------
struct Poly {
  std::vector<Vec3> a;  // a[i] t^i
  Vec3 operator()(double t) const {
    Vec3 v{};
    for (std::size_t i = a.size(); i-- > 0;) v = v * t + a[i];
    return v;
  }
  Vec3 derivative(double t) const {
    Vec3 v{};
    for (std::size_t i = a.size(); i-- > 1;) v = v * t + static_cast<double>(i) * a[i];
    return v;
  }
};

Outcome cross_extension_check() {
  Checks c;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), pt(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(1, 5);
  double restrict_err = 0.0, worst_ratio = 0.0, worst_operator = 0.0;
  bool bound_ok = true;
  for (int f = 0; f < 20; ++f) {
    Poly u1, u2;
    const Vec3 origin{coef(rng), coef(rng), 0.0};
    u1.a.push_back(origin);
    u2.a.push_back(origin);
    for (int i = deg(rng); i > 0; --i) u1.a.push_back({coef(rng), coef(rng), 0.0});
    for (int i = deg(rng); i > 0; --i) u2.a.push_back({coef(rng), coef(rng), 0.0});
    const PlaneField U = cross_extension(u1, u2);
    for (int i = 0; i < 1000; ++i) {
      const double t = pt(rng);
      restrict_err = std::max({restrict_err, norm(U(t, 0.0) - u1(t)), norm(U(0.0, t) - u2(t))});
    }
    constexpr double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
      for (int j = 0; j < 100; ++j) {
        const double x = -1.0 + 2.0 * i / 99, y = -1.0 + 2.0 * j / 99;
        const Vec3 dx = (U(x + h, y) - U(x - h, y)) / (2 * h);
        const Vec3 dy = (U(x, y + h) - U(x, y - h)) / (2 * h);
        const double rhs = std::max({norm(u1.derivative(x)), norm(u2.derivative(y)), norm(u1.derivative(0.0)),
                                     norm(u2.derivative(0.0))});
        // |grad U| as the largest coordinate partial
        const double lhs = std::max(norm(dx), norm(dy));
        if (lhs > rhs * (1.0 + 1e-7) + 1e-8) bound_ok = false;
        if (rhs > 0.0) {
          worst_ratio = std::max(worst_ratio, lhs / rhs);
          // spectral norm of the 2x2 Jacobian, for the record
          const double a = dot(dx, dx), b = dot(dx, dy), d = dot(dy, dy);
          const double op = std::sqrt(0.5 * (a + d + std::sqrt((a - d) * (a - d) + 4 * b * b)));
          worst_operator = std::max(worst_operator, op / rhs);
        }
      }
    }
  }
  c.require(restrict_err <= 1e-12, "restriction error " + sci(restrict_err));
  c.require(bound_ok, "partial-derivative bound violated, ratio " + sci(worst_ratio));
  c.note("restriction " + sci(restrict_err) + ", max partial/bound " + sci(worst_ratio) +
         ", max operator-norm/bound " + sci(worst_operator));
  return c.done();
}

// ---- 6 ------------------------------------------------------------------
GeodesicCurve line(const Surface& s, double angle, int n = 801) {
  std::vector<Vec3> pts;
  const Vec3 d{std::cos(angle), std::sin(angle), 0};
  for (int i = 0; i < n; ++i) pts.push_back((-1.0 + 2.0 * i / (n - 1)) * d);
  return make_curve(s, pts, false);
}

Mat2 full_metric(const Surface& s, const Vec3& x) {
  const ChartMetricSample g = s.chart_metric().evaluate(x.x, x.y);
  const double w = std::exp(2.0 * s.conformal_value(x));
  return {w * g.E, w * g.F, w * g.G};
}

// Geodesic curvature from finite differences of the full metric e^{2F} g.
// The step h must resolve the factor's tube, so callers scale it with the ball.
double oracle_curvature(const Surface& s, const Vec3& c, const Vec3& v, const Vec3& a, double h) {
  Mat2 dh[2];
  for (int k = 0; k < 2; ++k) {
    Vec3 e{};
    e[k] = 1.0;
    const Mat2 m2 = full_metric(s, c - 2.0 * h * e), m1 = full_metric(s, c - h * e);
    const Mat2 p1 = full_metric(s, c + h * e), p2 = full_metric(s, c + 2.0 * h * e);
    auto d = [&](double Mat2::*f) { return (m2.*f - p2.*f + 8.0 * (p1.*f - m1.*f)) / (12.0 * h); };
    dh[k] = {d(&Mat2::a11), d(&Mat2::a12), d(&Mat2::a22)};
  }
  auto comp = [](const Mat2& m, int i, int j) { return i == 0 && j == 0 ? m.a11 : (i == 1 && j == 1 ? m.a22 : m.a12); };
  const Mat2 H = full_metric(s, c);
  const Mat2 Hi = H.inverse();
  const double w[2] = {v.x, v.y};
  double acc[2] = {a.x, a.y};
  for (int cc = 0; cc < 2; ++cc) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double G = 0.0;
        for (int d = 0; d < 2; ++d)
          G += 0.5 * comp(Hi, cc, d) * (comp(dh[i], d, j) + comp(dh[j], d, i) - comp(dh[d], i, j));
        acc[cc] += G * w[i] * w[j];
      }
    }
  }
  const double hv1 = H.a11 * v.x + H.a12 * v.y, hv2 = H.a12 * v.x + H.a22 * v.y;
  const double sd = std::sqrt(H.det());
  const double rot[2] = {-hv2 / sd, hv1 / sd};
  const double sp = std::sqrt(H.quad(v.x, v.y));
  return -H.inner(acc[0], acc[1], rot[0], rot[1]) / (sp * sp * sp);
}

struct SplitAudit {
  std::size_t vertices = 0;
  bool g_plus = false;
  long weighted = 0;
  double curvature = 0.0;
  bool outside_zero = true;
};

SplitAudit audit_reduction(const std::vector<double>& angles) {
  const Surface s = make_flat_chart();
  std::vector<GeodesicCurve> curves;
  for (double a : angles) curves.push_back(line(s, a));
  const GeodesicNetwork net = make_network(s, curves);
  const SplitResult out = reduce_vertex(s, net, 0);
  SplitAudit a;
  a.vertices = out.network.vertices.size();
  a.g_plus = is_g_plus(out.network);
  a.weighted = weighted_vertex_count(out.network.vertices);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (std::size_t k = 0; k < out.factors.size(); ++k) {
    const DetourCurve& D = out.factors[k]->detour();
    const double h = 2e-5 * out.transcript[k].ball_radius;
    for (int i = 1; i < 200; ++i) {
      const double t = D.s0 + (D.s3 - D.s0) * i / 200.0;
      a.curvature = std::max(a.curvature, std::abs(oracle_curvature(out.surface, D.point(t), D.d1(t), D.d2(t), h)));
    }
    const SplitStep& st = out.transcript[k];
    for (int i = 0; i < 20000; ++i) {
      const Vec3 x{u(rng), u(rng), 0.0};
      if (norm(x - st.vertex) <= st.ball_radius) continue;
      if (out.factors[k]->value(x) != 0.0) a.outside_zero = false;
    }
  }
  return a;
}

Outcome splitting() {
  Checks c;
  const SplitAudit three = audit_reduction({0.1, 1.2, 2.3});
  c.require(three.vertices == 3 && three.g_plus, "order 3: " + std::to_string(three.vertices) + " vertices");
  c.require(three.weighted == 3, "order 3 weighted count " + std::to_string(three.weighted));
  c.require(three.curvature <= 1e-6, "order 3 detour curvature " + sci(three.curvature));
  c.require(three.outside_zero, "order 3 factor nonzero outside the ball");
  const SplitAudit four = audit_reduction({0.0, 0.8, 1.6, 2.4});
  c.require(four.vertices == 6 && four.g_plus, "order 4: " + std::to_string(four.vertices) + " vertices");
  c.require(four.weighted == 6, "order 4 weighted count " + std::to_string(four.weighted));
  c.require(four.curvature <= 1e-6, "order 4 detour curvature " + sci(four.curvature));
  c.require(four.outside_zero, "order 4 factor nonzero outside the ball");
  c.note("order 3 -> " + std::to_string(three.vertices) + " crossings, curvature " + sci(three.curvature) +
         "; order 4 -> " + std::to_string(four.vertices) + ", curvature " + sci(four.curvature));
  return c.done();
}

// ---- 7 ------------------------------------------------------------------
double level_mass(double k, double c) {
  const double r2 = 1.0 - c * c / k;
  return r2 > 0.0 ? kTwoPi * std::sqrt(r2) : 0.0;
}

// max over t_1 <= ... <= t_p on an n-point grid of sum mass(sigma(t_i))
double grid_oracle(double k, int p, int n) {
  std::vector<double> m;
  for (int j = 0; j < n; ++j) m.push_back(level_mass(k, (2.0 * j / (n - 1) - 1.0) * std::sqrt(k)));
  std::function<double(int, int)> best = [&](int left, int from) -> double {
    if (left == 0) return 0.0;
    double b = 0.0;
    for (int j = from; j < n; ++j) b = std::max(b, m[static_cast<std::size_t>(j)] + best(left - 1, j));
    return b;
  };
  return best(p, 0);
}

Outcome widths() {
  Checks c;
  const double k = 100.0;
  const OneSweepout sw = level_circle_sweepout(make_mk(k, 1.0), 512);
  double worst = 0.0;
  for (int p = 1; p <= 5; ++p) {
    const WidthBound b = guth_p_sweepout_bound(sw, p);
    const double rel = std::abs(b.upper_bound / (p * kTwoPi) - 1.0);
    worst = std::max(worst, rel);
    c.require(rel <= 1e-6, "p=" + std::to_string(p) + " relative deviation " + sci(rel));
    c.require(b.upper_bound == p * sw.max_mass, "p=" + std::to_string(p) + " not exactly p * max_mass");
    const double g = grid_oracle(k, p, 20);
    c.require(g <= b.upper_bound + 1e-9, "p=" + std::to_string(p) + " grid oracle exceeds bound");
  }
  for (int p = 1; p <= 16; ++p) {
    int r = 0;
    while ((r + 1) * (r + 1) <= p) ++r;
    c.require(round_sphere_width(p) == kTwoPi * r, "round table p=" + std::to_string(p));
  }
  c.note("max |bound/(2 pi p) - 1| " + sci(worst));
  return c.done();
}

// ---- 8 / 11 -------------------------------------------------------------
std::string mk_report_json(const MkExperimentReport& r) { return Json(r).dump(2); }

MkExperimentReport run_mk_experiment() { return mk_multiplicity_experiment(100.0, 1.0, 4.0 * kPi, 200, 1); }

std::string first_mk_json;

Outcome multiplicity() {
  Checks c;
  const MkExperimentReport r = run_mk_experiment();
  first_mk_json = mk_report_json(r);
  int short_classes = 0;
  bool short_is_gamma0 = true;
  for (const auto& f : r.found) {
    c.require(f.intersects_equator, "class from seed " + std::to_string(f.first_seed) + " misses the equator");
    if (f.length < kTwoPi + 0.1) {
      ++short_classes;
      short_is_gamma0 = short_is_gamma0 && f.is_gamma0;
    }
  }
  c.require(short_classes == 1 && short_is_gamma0,
            std::to_string(short_classes) + " classes shorter than 2 pi + 0.1");
  c.note(std::to_string(r.converged) + "/200 seeds converged, " + std::to_string(r.found.size()) +
         " classes <= 4 pi, shortest length " + (r.found.empty() ? std::string("-") : sci(r.found.front().length)));
  return c.done();
}

Outcome determinism() {
  Checks c;
  if (first_mk_json.empty()) first_mk_json = mk_report_json(run_mk_experiment());
  const std::string second = mk_report_json(run_mk_experiment());
  c.require(second == first_mk_json, "reports differ");
  c.note(std::to_string(second.size()) + " bytes identical");
  return c.done();
}

// ---- 9 ------------------------------------------------------------------
Outcome ellipsoid() {
  Checks c;
  const EllipsoidReport r = ellipsoid_experiment(0.96, 1.0, 1.04);
  c.require(r.geodesics.size() == 3, "found " + std::to_string(r.geodesics.size()) + " coordinate geodesics");
  double worst = 0.0;
  for (const auto& g : r.geodesics) {
    const int j = (g.plane + 1) % 3, k = (g.plane + 2) % 3;
    const double A = 1.0 / std::sqrt(r.a[static_cast<std::size_t>(j)]);
    const double B = 1.0 / std::sqrt(r.a[static_cast<std::size_t>(k)]);
    const double big = std::max(A, B), small = std::min(A, B);
    const double oracle = 4.0 * big * boost::math::ellint_2(std::sqrt(1.0 - small * small / (big * big)));
    worst = std::max(worst, std::abs(g.length - oracle));
    for (int m = 0; m < 3; ++m) {
      c.require(g.nullity[static_cast<std::size_t>(m)] == 0,
                "plane " + std::to_string(g.plane + 1) + " cover " + std::to_string(m + 1) + " nullity " +
                    std::to_string(g.nullity[static_cast<std::size_t>(m)]));
    }
  }
  c.require(worst <= 1e-6, "length error " + sci(worst));
  c.note("max |L - ellint| " + sci(worst));
  return c.done();
}

// ---- 10 -----------------------------------------------------------------
Outcome appendix() {
  Checks c;
  const Surface s = make_sphere();
  const GeodesicCurve a = close_geodesic(s, {{1, 0, 0}, {0, 1, 0}, kTwoPi});
  const GeodesicCurve b = close_geodesic(s, {{0, 1, 0}, {0, 0, 1}, kTwoPi});
  const GeodesicNetwork net = make_network(s, {a, b});
  const AppendixReport r = check_appendix_bounds(net, 2, 1.0, kTwoPi);
  c.require(r.edge_bound_checked && r.edge_bound_pass, "edge bound");
  c.require(r.edge_count == 4, "edge count " + std::to_string(r.edge_count));
  c.require(std::abs(r.edge_bound - 4.0) <= 1e-12, "edge bound value " + sci(r.edge_bound));
  c.require(r.length_bound_checked && r.length_bound_pass, "length bound");
  c.note("e_G = " + std::to_string(r.edge_count) + " <= " + sci(r.edge_bound) + ", lengths <= " + sci(r.length_bound));
  return c.done();
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "curvature of M_k on the equator", 1.0, curvature},
      {2, "closure onto gamma_0", 5.0, closure},
      {3, "Jacobi spectra", 10.0, spectra},
      {4, "second-variation consistency", 10.0, second_variation_match},
      {5, "cross-extension", 1.0, cross_extension_check},
      {6, "vertex splitting", 30.0, splitting},
      {7, "width bounds", 5.0, widths},
      {8, "multiplicity experiment", 300.0, multiplicity},
      {9, "ellipsoid", 60.0, ellipsoid},
      {10, "appendix checkers", 1.0, appendix},
      {11, "determinism", 300.0, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) {
      o.pass = false;
      o.detail += " | runtime over " + sci(c.limit_s) + " s";
    }
    failed += o.pass ? 0 : 1;
    std::printf("CRITERION %2d %s: %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
