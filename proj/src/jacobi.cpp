#include "geolab/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geolab/kernels.hpp"

namespace geolab {

namespace {

void require_geodesic(const GeodesicCurve& curve, const Surface& surface, double tol) {
  double worst = 0.0;
  for (double k : geodesic_curvature_profile(curve, surface)) worst = std::max(worst, std::abs(k));
  if (!(worst <= tol)) {
    throw Error(ErrorKind::NotAGeodesic, "max geodesic curvature " + std::to_string(worst) +
                                             " exceeds " + std::to_string(tol));
  }
}

std::vector<double> curvature_on_samples(const GeodesicCurve& curve, const Surface& surface) {
  std::vector<double> K(curve.samples.size());
  for (std::size_t i = 0; i < K.size(); ++i) K[i] = gauss_curvature(surface, curve.samples[i]);
  return K;
}

// Six-point periodic Lagrange interpolation of uniformly spaced samples at
// fractional index t.
double periodic_interp(const std::vector<double>& f, double t) {
  const long n = static_cast<long>(f.size());
  const double fl = std::floor(t);
  const double frac = t - fl;
  const long i0 = static_cast<long>(fl);
  auto at = [&](long i) { return f[((i % n) + n) % n]; };
  if (frac == 0.0) return at(i0);
  double sum = 0.0;
  for (int a = -2; a <= 3; ++a) {
    double w = 1.0;
    for (int b = -2; b <= 3; ++b) {
      if (b != a) w *= (frac - b) / static_cast<double>(a - b);
    }
    sum += w * at(i0 + a);
  }
  return sum;
}

struct GridSpectrum {
  std::vector<double> eig;
  int below_minus = 0;
  int below_plus = 0;
};

GridSpectrum solve_grid(const std::vector<double>& Kc, double length, int m, int N, int count, double tol) {
  const double period = m * length;
  const double h = period / N;
  const double nc = static_cast<double>(Kc.size());
  std::vector<double> K(N);
  for (int j = 0; j < N; ++j) {
    const double s = std::fmod(j * h, length);
    K[j] = periodic_interp(Kc, s / length * nc);
  }
  std::vector<double> ad, ao, bd, bo;
  build_jacobi_pencil(K, h, ad, ao, bd, bo);
  double kmax = 0.0;
  for (double k : K) kmax = std::max(kmax, std::abs(k));
  GridSpectrum g;
  g.eig = pencil_lowest_eigenvalues(ad, ao, bd, bo, count, -kmax - 1.0);
  kernels::CyclicPencil P{ad, ao, bd, bo};
  const double shifts[4] = {-tol, tol, 0.0, 0.0};
  int counts[4];
  kernels::active().pencil_negative_count4(P, shifts, counts);
  g.below_minus = counts[0];
  g.below_plus = counts[1];
  return g;
}

}  // namespace

void build_jacobi_pencil(const std::vector<double>& K, double h, std::vector<double>& a_diag,
                         std::vector<double>& a_off, std::vector<double>& b_diag, std::vector<double>& b_off) {
  const std::size_t n = K.size();
  const double ih2 = 1.0 / (h * h);
  a_diag.resize(n);
  a_off.resize(n);
  b_diag.assign(n, 10.0 / 12.0);
  b_off.assign(n, 1.0 / 12.0);
  // Numerov: -delta^2/h^2 phi = (1 + delta^2/12)(K + lambda) phi, with the
  // K-weighted mass matrix symmetrized by averaging neighbours.
  for (std::size_t i = 0; i < n; ++i) {
    const double kn = K[(i + 1) % n];
    a_diag[i] = 2.0 * ih2 - (10.0 / 12.0) * K[i];
    a_off[i] = -ih2 - (1.0 / 12.0) * 0.5 * (K[i] + kn);
  }
}

std::vector<double> pencil_lowest_eigenvalues(const std::vector<double>& a_diag, const std::vector<double>& a_off,
                                              const std::vector<double>& b_diag, const std::vector<double>& b_off,
                                              int count, double lower_bound) {
  const std::size_t n = a_diag.size();
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "pencil needs at least 3 rows");
  count = std::min<int>(count, static_cast<int>(n));
  const kernels::CyclicPencil P{a_diag, a_off, b_diag, b_off};
  const auto& K = kernels::active();
  auto count_below = [&](double s) {
    const double sh[4] = {s, s, s, s};
    int c[4];
    K.pencil_negative_count4(P, sh, c);
    return c[0];
  };
  double lo = lower_bound;
  while (count_below(lo) > 0) lo = 2.0 * lo - 1.0;
  double hi = 1.0;
  while (count_below(hi) < count) hi *= 2.0;

  std::vector<double> eig(count);
  double start = lo;
  for (int j = 0; j < count; ++j) {
    double a = start, b = hi;
    for (int it = 0; it < 400; ++it) {
      const double w = b - a;
      if (w <= 4e-15 * std::max({1.0, std::abs(a), std::abs(b)})) break;
      double sh[4];
      for (int k = 0; k < 4; ++k) sh[k] = a + w * (k + 1) / 5.0;
      int c[4];
      K.pencil_negative_count4(P, sh, c);
      double na = a, nb = b;
      for (int k = 0; k < 4; ++k) {
        if (c[k] > j) {
          nb = sh[k];
          break;
        }
        na = sh[k];
      }
      if (na == a && nb == b) break;
      a = na;
      b = nb;
    }
    eig[j] = 0.5 * (a + b);
    start = a;
  }
  return eig;
}

double second_variation(const GeodesicCurve& curve, const std::vector<double>& phi, const std::vector<double>& psi,
                        const Surface& surface, double geodesic_tolerance) {
  const std::size_t nc = curve.samples.size();
  if (phi.size() != psi.size() || nc == 0 || phi.size() % nc != 0) {
    throw Error(ErrorKind::InvalidArgument, "phi and psi must be sampled on the curve grid or a cover of it");
  }
  require_geodesic(curve, surface, geodesic_tolerance);
  const std::size_t n = phi.size();
  const std::vector<double> Kc = curvature_on_samples(curve, surface);
  std::vector<double> K(n);
  for (std::size_t i = 0; i < n; ++i) K[i] = Kc[i % nc];
  const double ds = curve.length / static_cast<double>(nc);
  const auto& kt = kernels::active();
  std::vector<double> dphi(n), dpsi(n);
  kt.periodic_d1(phi, ds, dphi);
  kt.periodic_d1(psi, ds, dpsi);
  return ds * (kt.dot(dphi, dpsi) - kt.dot3(K, phi, psi));
}

SpectrumReport jacobi_spectrum(const GeodesicCurve& curve, const Surface& surface, int m, int N,
                               const SpectrumOptions& opt) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "cover multiplicity must be >= 1");
  if (N < 256) throw Error(ErrorKind::GridTooCoarse, "grid size " + std::to_string(N) + " < 256");
  if (!curve.closed) throw Error(ErrorKind::InvalidArgument, "jacobi spectrum needs a closed curve");
  require_geodesic(curve, surface, opt.geodesic_tolerance);

  const std::vector<double> Kc = curvature_on_samples(curve, surface);
  double kmax = 0.0;
  for (double k : Kc) kmax = std::max(kmax, std::abs(k));
  const double period = m * curve.length;
  const double h = period / N;

  SpectrumReport r;
  r.grid_size = N;
  r.cover_multiplicity = m;
  r.period = period;
  r.max_abs_curvature = kmax;
  r.zero_tolerance = std::max(1e-8, 10.0 * h * h * kmax);

  const GridSpectrum fine = solve_grid(Kc, curve.length, m, N, opt.count, r.zero_tolerance);
  const GridSpectrum coarse = solve_grid(Kc, curve.length, m, N / 2, opt.count, r.zero_tolerance);
  r.eigenvalues = fine.eig;
  r.error_estimates.resize(fine.eig.size());
  for (std::size_t i = 0; i < fine.eig.size(); ++i) {
    // fourth-order scheme: e(N) ~ (e(N/2) - e(N)) / 15
    r.error_estimates[i] = std::abs(coarse.eig[i] - fine.eig[i]) / 15.0;
  }
  r.index = fine.below_minus;
  r.nullity = fine.below_plus - fine.below_minus;

  if (r.eigenvalues.size() >= 3) {
    const double err = std::max({r.error_estimates[0], r.error_estimates[1], r.error_estimates[2]});
    const double g1 = r.eigenvalues[1] - r.eigenvalues[0];
    const double g2 = r.eigenvalues[2] - r.eigenvalues[1];
    if (err > 0.0 && g1 < err && g2 < err) {
      throw Error(ErrorKind::GridTooCoarse, "lowest eigenvalue gaps below the discretization error " +
                                                std::to_string(err));
    }
  }
  return r;
}

NetworkIndex network_index(const GeodesicNetwork& network, const std::vector<int>& multiplicities, int N) {
  NetworkIndex out;
  out.multiplicities = multiplicities;
  if (out.multiplicities.empty()) out.multiplicities.assign(network.curves.size(), 1);
  if (out.multiplicities.size() != network.curves.size()) {
    throw Error(ErrorKind::InvalidArgument, "one multiplicity per curve required");
  }
  std::ostringstream form;
  form << "Q_V =";
  for (std::size_t i = 0; i < network.curves.size(); ++i) {
    if (out.multiplicities[i] < 1) throw Error(ErrorKind::InvalidArgument, "multiplicities must be positive");
    SpectrumReport s = jacobi_spectrum(network.curves[i], network.surface, 1, N);
    out.index += s.index;
    out.spectra.push_back(std::move(s));
    form << (i == 0 ? " " : " + ") << out.multiplicities[i] << "*Q_" << i;
  }
  out.form = form.str();
  return out;
}

namespace {
bool near_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }
}  // namespace

bool degeneracy_criterion_mk(double k, int m) {
  if (!(k > 0.0) || m < 1) throw Error(ErrorKind::InvalidArgument, "need k > 0 and m >= 1");
  return near_integer(2.0 * m / std::sqrt(k));
}

bool degeneracy_exact_mk(double k, int m) {
  if (!(k > 0.0) || m < 1) throw Error(ErrorKind::InvalidArgument, "need k > 0 and m >= 1");
  return near_integer(m / std::sqrt(k));
}

}  // namespace geolab
