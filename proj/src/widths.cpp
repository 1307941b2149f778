#include "geolab/widths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "geolab/jacobi.hpp"
#include "geolab/parallel.hpp"
#include "geolab/network.hpp"

namespace geolab {

namespace {

constexpr double kGolden = 1.6180339887498948482;
constexpr double kPlastic = 1.3247179572447460260;

double frac(double x) { return x - std::floor(x); }

double pole_height(const MkParams& p) { return std::pow(p.k, 1.0 / (2.0 * p.mu)); }

double circle_radius(const MkParams& p, double c) {
  const double r2 = 1.0 - std::pow(std::abs(c), 2.0 * p.mu) / p.k;
  return r2 > 0.0 ? std::sqrt(r2) : 0.0;
}

double level_circle_mass(const Surface& s, const MkParams& p, double c, int points) {
  const double r = circle_radius(p, c);
  if (r <= 0.0) return 0.0;
  std::vector<Vec3> pts(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double th = kTwoPi * i / points;
    pts[static_cast<std::size_t>(i)] = {r * std::cos(th), r * std::sin(th), c};
  }
  return curve_length(make_curve(s, std::move(pts), true), s);
}

double interpolate_mass(const OneSweepout& sw, double t) {
  const auto& T = sw.parameters;
  if (t <= T.front()) return sw.masses.front();
  if (t >= T.back()) return sw.masses.back();
  const auto it = std::upper_bound(T.begin(), T.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - T.begin());
  const double w = (t - T[j - 1]) / (T[j] - T[j - 1]);
  return (1.0 - w) * sw.masses[j - 1] + w * sw.masses[j];
}

// Largest sum of p masses over nondecreasing grid indices.
double simplex_grid_max(const OneSweepout& sw, int p, int n) {
  std::vector<double> m(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(j)] = interpolate_mass(sw, static_cast<double>(j) / (n - 1));
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  double best = 0.0;
  while (true) {
    double s = 0.0;
    for (int i : idx) s += m[static_cast<std::size_t>(i)];
    best = std::max(best, s);
    int pos = p - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - 1) --pos;
    if (pos < 0) break;
    const int v = idx[static_cast<std::size_t>(pos)] + 1;
    for (int i = pos; i < p; ++i) idx[static_cast<std::size_t>(i)] = v;
  }
  return best;
}

double unit_from(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace

int worker_threads() {
  if (const char* env = std::getenv("GEOLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

OneSweepout level_circle_sweepout(const Surface& s, int samples, int points_per_curve) {
  if (!s.mk) throw Error(ErrorKind::InvalidArgument, "level-circle sweepout needs an M_k surface");
  if (samples < 3) throw Error(ErrorKind::InvalidArgument, "at least 3 sweepout samples required");
  if (points_per_curve < 16) throw Error(ErrorKind::InvalidArgument, "at least 16 points per circle required");
  const MkParams p = *s.mk;
  const double h = pole_height(p);
  OneSweepout sw;
  sw.family = "level circles x3 = c(t), c = (2t - 1) k^(1/(2 mu))";
  sw.samples = samples;
  sw.parameters.resize(static_cast<std::size_t>(samples));
  sw.heights.resize(sw.parameters.size());
  sw.masses.resize(sw.parameters.size());
  std::size_t best = 0;
  for (int j = 0; j < samples; ++j) {
    const std::size_t u = static_cast<std::size_t>(j);
    const double t = static_cast<double>(j) / (samples - 1);
    const double c = (j == 0 || j == samples - 1) ? (j == 0 ? -h : h) : (2.0 * t - 1.0) * h;
    sw.parameters[u] = t;
    sw.heights[u] = c;
    sw.masses[u] = level_circle_mass(s, p, c, points_per_curve);
    if (sw.masses[u] > sw.masses[best]) best = u;
  }
  // The sampled maximum sits up to one sample step from the true one;
  // refine inside the neighbouring bracket.
  const double lo = sw.parameters[best == 0 ? 0 : best - 1];
  const double hi = sw.parameters[std::min(best + 1, sw.parameters.size() - 1)];
  const auto neg_mass = [&](double t) { return -level_circle_mass(s, p, (2.0 * t - 1.0) * h, points_per_curve); };
  const auto [t_star, neg] = boost::math::tools::brent_find_minima(neg_mass, lo, hi, 52);
  sw.max_mass = sw.masses[best];
  sw.argmax_t = sw.parameters[best];
  sw.argmax_height = sw.heights[best];
  if (-neg > sw.max_mass) {
    sw.max_mass = -neg;
    sw.argmax_t = t_star;
    sw.argmax_height = (2.0 * t_star - 1.0) * h;
  }
  return sw;
}

WidthBound guth_p_sweepout_bound(const OneSweepout& sw, int p, int grid_points_per_axis) {
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");
  WidthBound b;
  b.p = p;
  b.upper_bound = p * sw.max_mass;
  b.construction = "Guth sum of " + std::to_string(p) + " copies of: " + sw.family;
  if (grid_points_per_axis >= 2 && p <= 6 && !sw.masses.empty()) {
    b.grid_points_per_axis = grid_points_per_axis;
    b.grid_max = simplex_grid_max(sw, p, grid_points_per_axis);
    b.grid_consistent = b.grid_max <= b.upper_bound + 1e-9;
  }
  return b;
}

double round_sphere_width(int p) {
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");
  int r = static_cast<int>(std::sqrt(static_cast<double>(p)));
  while ((r + 1) * (r + 1) <= p) ++r;
  while (r * r > p) --r;
  return kTwoPi * r;
}

std::vector<MkSeed> mk_seeds(const Surface& s, int n, std::uint64_t seed, double band) {
  if (!s.mk) throw Error(ErrorKind::InvalidArgument, "M_k seeds need an M_k surface");
  if (!(band > 0.0 && band < 1.0)) throw Error(ErrorKind::InvalidArgument, "latitude band must lie in (0, 1)");
  const MkParams p = *s.mk;
  const double h = pole_height(p);
  std::mt19937_64 gen(seed);
  const double s1 = unit_from(gen), s2 = unit_from(gen), s3 = unit_from(gen);
  std::vector<MkSeed> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    const double z = band * h * (2.0 * frac((i + 0.5) / n + s1) - 1.0);
    const double th = kTwoPi * frac(i / kGolden + s2);
    const double az = kTwoPi * frac(i / kPlastic + s3);
    const double r = circle_radius(p, z);
    const Vec3 x = s.project({r * std::cos(az), r * std::sin(az), z});
    const Vec3 e1 = s.tangent_project(x, {-std::sin(az), std::cos(az), 0.0});
    const Vec3 e2 = s.tangent_project(x, {0.0, 0.0, 1.0});
    const Vec3 d = std::cos(th) * (e1 / norm(e1)) + std::sin(th) * (e2 / norm(e2));
    out.push_back({x, d / s.speed(x, d)});
  }
  return out;
}

bool MkExperimentReport::pass() const {
  return all_intersect_equator && short_class_is_gamma0 && gamma0_found && index_bound && vertex_bound &&
         shortest_is_simple && widths_dominate_reference;
}

MkExperimentReport mk_multiplicity_experiment(double k, double mu, double length_cap, int n_seeds,
                                              std::uint64_t seed, const MkExperimentOptions& opt) {
  if (!(k >= 1.0)) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (!(mu >= 1.0)) throw Error(ErrorKind::InvalidArgument, "mu must be >= 1");
  if (!(length_cap > 0.0)) throw Error(ErrorKind::InvalidArgument, "length cap must be positive");
  if (n_seeds < 0) throw Error(ErrorKind::InvalidArgument, "seed count must be nonnegative");
  if (opt.p < 1) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");

  const Surface s = make_mk(k, mu);
  MkExperimentReport r;
  r.k = k;
  r.mu = mu;
  r.length_cap = length_cap;
  r.n_seeds = n_seeds;
  r.seed = seed;
  r.options = opt;
  r.clustering_radius = 1e-4 * s.diameter();
  r.dedup_tolerance = 1e-5 * s.diameter();
  r.seeds = mk_seeds(s, n_seeds, seed, opt.latitude_band);

  std::vector<std::optional<GeodesicCurve>> shot(static_cast<std::size_t>(n_seeds));
  CloseOptions co;
  co.samples = opt.close_samples;
  co.tolerance = opt.close_tolerance;
  parallel_for(n_seeds, opt.threads > 0 ? opt.threads : worker_threads(), [&](int i) {
    const MkSeed& sd = r.seeds[static_cast<std::size_t>(i)];
    try {
      shot[static_cast<std::size_t>(i)] = close_geodesic(s, {sd.point, sd.direction, kTwoPi}, co);
    } catch (const Error&) {
    }
  });

  // Dedup in seed order.
  for (int i = 0; i < n_seeds; ++i) {
    auto& c = shot[static_cast<std::size_t>(i)];
    if (!c) {
      ++r.failed;
      continue;
    }
    ++r.converged;
    if (c->length > length_cap) {
      ++r.above_cap;
      continue;
    }
    bool merged = false;
    for (auto& f : r.found) {
      if (hausdorff_distance(f.curve, *c, r.dedup_tolerance) <= r.dedup_tolerance) {
        ++f.hits;
        merged = true;
        break;
      }
    }
    if (merged) continue;
    FoundGeodesic f;
    f.first_seed = i;
    f.hits = 1;
    f.curve = std::move(*c);
    r.found.push_back(std::move(f));
  }

  parallel_for(static_cast<int>(r.found.size()), opt.threads > 0 ? opt.threads : worker_threads(), [&](int i) {
    FoundGeodesic& f = r.found[static_cast<std::size_t>(i)];
    f.length = f.curve.length;
    f.closure_residual = f.curve.closure_residual;
    double zmax = 0.0, zmin = std::abs(f.curve.samples.front().z);
    bool sign_change = false;
    const std::size_t n = f.curve.samples.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double z = f.curve.samples[j].z;
      zmax = std::max(zmax, std::abs(z));
      zmin = std::min(zmin, std::abs(z));
      if (z * f.curve.samples[(j + 1) % n].z <= 0.0) sign_change = true;
    }
    f.max_abs_height = zmax;
    f.min_abs_height = zmin;
    f.intersects_equator = sign_change || zmin <= r.clustering_radius;
    // A degenerate equator leaves near-geodesic parallels that close within
    // the shooting tolerance; they count as gamma_0 inside the clustering radius.
    f.is_gamma0 = zmax <= r.clustering_radius && std::abs(f.length - kTwoPi) <= 1e-6;
    f.self_vertices = static_cast<int>(detect_vertices(s, {f.curve}).size());
    try {
      const SpectrumReport sp = jacobi_spectrum(f.curve, s, 1, opt.spectrum_grid);
      f.index = sp.index;
      f.nullity = sp.nullity;
      f.eigenvalues = sp.eigenvalues;
    } catch (const Error&) {
      f.index = -1;
      f.nullity = -1;
    }
  });
  std::stable_sort(r.found.begin(), r.found.end(), [](const FoundGeodesic& a, const FoundGeodesic& b) {
    return a.length < b.length;
  });

  const FoundGeodesic* gamma0 = nullptr;
  for (std::size_t i = 0; i < r.found.size(); ++i) {
    const FoundGeodesic& f = r.found[i];
    r.all_intersect_equator = r.all_intersect_equator && f.intersects_equator;
    if (f.length < kTwoPi + opt.short_gap && !f.is_gamma0) r.short_class_is_gamma0 = false;
    if (!f.is_gamma0) continue;
    ++r.gamma0_classes;
    if (!gamma0 || f.max_abs_height < gamma0->max_abs_height) {
      gamma0 = &f;
      r.gamma0_class = static_cast<int>(i);
    }
  }
  r.gamma0_found = gamma0 != nullptr;
  if (!r.found.empty()) r.shortest_is_simple = r.found.front().self_vertices == 0;

  const OneSweepout sw = level_circle_sweepout(s, opt.sweepout_samples);
  for (int l = 1; l <= opt.p; ++l) {
    const WidthBound b = guth_p_sweepout_bound(sw, l, 20);
    WidthRow row{l, b.upper_bound, kTwoPi * l, b.upper_bound - kTwoPi * l};
    r.widths_dominate_reference = r.widths_dominate_reference && b.grid_consistent && row.gap >= -1e-9 &&
                                  row.gap <= 1e-6;
    r.widths.push_back(row);
    // the candidate network at level l is l * gamma_0
    r.index_bound = r.index_bound && gamma0 && gamma0->index >= 0 && gamma0->index <= l;
    r.vertex_bound = r.vertex_bound && gamma0 && gamma0->self_vertices <= l;
  }
  return r;
}

double ellipse_circumference(double a, double b, double tol) {
  if (!(a > 0.0 && b > 0.0)) throw Error(ErrorKind::InvalidArgument, "semi-axes must be positive");
  const auto f = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  // Periodic integrand: the trapezoidal rule converges geometrically.
  int n = 16;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += f(kTwoPi * i / n);
  double prev = kTwoPi * sum / n;
  for (int level = 0; level < 24; ++level) {
    for (int i = 0; i < n; ++i) sum += f(kTwoPi * (i + 0.5) / n);
    n *= 2;
    const double cur = kTwoPi * sum / n;
    if (std::abs(cur - prev) <= tol * cur) return cur;
    prev = cur;
  }
  throw Error(ErrorKind::NoConvergence, "ellipse quadrature did not converge");
}

bool EllipsoidReport::pass() const { return lengths_match && nondegenerate; }

EllipsoidReport ellipsoid_experiment(double a1, double a2, double a3, const EllipsoidOptions& opt) {
  const std::array<double, 3> a{a1, a2, a3};
  for (double v : a) {
    if (!(v > 0.0) || std::abs(v - 1.0) > 0.1) {
      throw Error(ErrorKind::InvalidArgument, "ellipsoid coefficients must be positive and within 10% of 1");
    }
  }
  if (!(a1 <= a2 && a2 <= a3)) throw Error(ErrorKind::InvalidArgument, "coefficients must be ordered a1 <= a2 <= a3");
  if (opt.seed_budget < 1) throw Error(ErrorKind::InvalidArgument, "seed budget must be positive");

  const Surface s = make_ellipsoid(a1, a2, a3);
  EllipsoidReport r;
  r.a = a;
  CloseOptions co;
  co.samples = opt.close_samples;
  co.tolerance = opt.close_tolerance;
  constexpr double kGoldenAngle = 2.3999632297286533222;

  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, kx = (i + 2) % 3;
    EllipsoidGeodesic g;
    g.plane = i;
    g.semi_axes = {1.0 / std::sqrt(a[static_cast<std::size_t>(j)]), 1.0 / std::sqrt(a[static_cast<std::size_t>(kx)])};
    const double A = g.semi_axes[0], B = g.semi_axes[1];
    bool found = false;
    for (int attempt = 0; attempt < opt.seed_budget && !found; ++attempt) {
      g.attempts = attempt + 1;
      const double phi = attempt * kGoldenAngle;
      Vec3 x{}, d{};
      x[j] = A * std::cos(phi);
      x[kx] = B * std::sin(phi);
      d[j] = -A * std::sin(phi);
      d[kx] = B * std::cos(phi);
      try {
        GeodesicCurve c = close_geodesic(s, {x, d, 0.5 * kTwoPi * (A + B)}, co);
        double res = 0.0;
        for (const Vec3& q : c.samples) res = std::max(res, std::abs(q[i]));
        if (res > 1e-8 || !c.primitive) continue;
        g.plane_residual = res;
        g.curve = std::move(c);
        found = true;
      } catch (const Error&) {
      }
    }
    if (!found) {
      throw Error(ErrorKind::SeedBudgetExhausted,
                  "no closed geodesic in the plane x" + std::to_string(i + 1) + " = 0 after " +
                      std::to_string(opt.seed_budget) + " seeds");
    }
    g.length = g.curve.length;
    g.quadrature_length = ellipse_circumference(A, B);
    g.length_error = std::abs(g.length - g.quadrature_length);
    for (int m = 1; m <= 3; ++m) {
      const SpectrumReport sp = jacobi_spectrum(g.curve, s, m, opt.spectrum_grid * m);
      g.index[static_cast<std::size_t>(m - 1)] = sp.index;
      g.nullity[static_cast<std::size_t>(m - 1)] = sp.nullity;
      r.nondegenerate = r.nondegenerate && sp.nullity == 0;
    }
    r.lengths_match = r.lengths_match && g.length_error <= 1e-6;
    r.geodesics.push_back(std::move(g));
  }

  double spread = 0.0;
  for (const auto& g : r.geodesics) spread = std::max(spread, std::abs(g.length - kTwoPi));
  for (std::size_t u = 0; u < 3; ++u) {
    for (std::size_t v = u + 1; v < 3; ++v) {
      if (std::abs(r.geodesics[u].length - r.geodesics[v].length) <= 1e-9) r.distinct_lengths = false;
    }
  }

  // With every length within `spread` of 2 pi, sum m_i L_i can only match the
  // round value 2 pi floor(sqrt p) when sum m_i = floor(sqrt p); the tolerance
  // makes that explicit.
  for (int p = 4; p <= opt.max_p; ++p) {
    MultiplicityRow row;
    row.p = p;
    row.omega_reference = round_sphere_width(p);
    row.multiplicity_forced = true;
    for (int m1 = 0; m1 <= p; ++m1) {
      for (int m2 = 0; m1 + m2 <= p; ++m2) {
        for (int m3 = 0; m1 + m2 + m3 <= p; ++m3) {
          const int total = m1 + m2 + m3;
          if (total == 0) continue;
          const double sum = m1 * r.geodesics[0].length + m2 * r.geodesics[1].length + m3 * r.geodesics[2].length;
          if (std::abs(sum - row.omega_reference) > total * spread + 1e-9) continue;
          row.representations.push_back({m1, m2, m3});
          if (m1 == 1 && m2 == 1 && m3 == 1) row.all_ones_admissible = true;
          if (std::max({m1, m2, m3}) < 2) row.multiplicity_forced = false;
        }
      }
    }
    if (row.representations.empty()) row.multiplicity_forced = false;
    r.multiplicity.push_back(std::move(row));
  }
  return r;
}

}  // namespace geolab
