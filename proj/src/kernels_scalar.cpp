#include <cmath>

#include "geolab/kernels.hpp"
#include "kernels_impl.hpp"

namespace geolab::kernels {
namespace {

void periodic_d1(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  const double inv = 1.0 / (12.0 * h);
  for (std::size_t i = 0; i < n; ++i) {
    const double fm2 = f[(i + n - 2) % n];
    const double fm1 = f[(i + n - 1) % n];
    const double fp1 = f[(i + 1) % n];
    const double fp2 = f[(i + 2) % n];
    out[i] = ((fm2 - fp2) + 8.0 * (fp1 - fm1)) * inv;
  }
}

void periodic_d2(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  const double inv = 1.0 / (12.0 * h * h);
  for (std::size_t i = 0; i < n; ++i) {
    const double fm2 = f[(i + n - 2) % n];
    const double fm1 = f[(i + n - 1) % n];
    const double fp1 = f[(i + 1) % n];
    const double fp2 = f[(i + 2) % n];
    out[i] = ((16.0 * (fm1 + fp1) - (fm2 + fp2)) - 30.0 * f[i]) * inv;
  }
}

double sum_norm3(std::span<const double> x, std::span<const double> y, std::span<const double> z) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += std::sqrt((x[i] * x[i] + y[i] * y[i]) + z[i] * z[i]);
  }
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double dot3(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] * b[i]) * c[i];
  return acc;
}

SegmentHit nearest_segment(const Vec3& p, const SegmentSoA& s) {
  SegmentHit best{HUGE_VAL, 0, 0.0};
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double wx = p.x - s.x0[j];
    const double wy = p.y - s.y0[j];
    const double wz = p.z - s.z0[j];
    const double num = (wx * s.dx[j] + wy * s.dy[j]) + wz * s.dz[j];
    double t = s.len2[j] > 0.0 ? num / s.len2[j] : 0.0;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    const double ex = p.x - (s.x0[j] + t * s.dx[j]);
    const double ey = p.y - (s.y0[j] + t * s.dy[j]);
    const double ez = p.z - (s.z0[j] + t * s.dz[j]);
    const double d2 = (ex * ex + ey * ey) + ez * ez;
    if (d2 < best.dist2) best = {d2, j, t};
  }
  return best;
}

void sphere_candidates(const Vec3& c, double radius, const SegmentSoA& s, double tol,
                       std::vector<std::size_t>& out) {
  out.clear();
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double ex = s.cx[j] - c.x;
    const double ey = s.cy[j] - c.y;
    const double ez = s.cz[j] - c.z;
    const double r = (radius + s.rad[j]) + tol;
    if ((ex * ex + ey * ey) + ez * ez <= r * r) out.push_back(j);
  }
}

int pencil_count_one(const CyclicPencil& P, double shift) {
  const std::size_t n = P.size();
  const double floor = P.pivot_floor;
  int neg = 0;
  double d = P.a_diag[0] - shift * P.b_diag[0];
  if (std::fabs(d) < floor) d = -floor;
  if (d < 0.0) ++neg;
  double w = P.a_off[n - 1] - shift * P.b_off[n - 1];
  double schur = (P.a_diag[n - 1] - shift * P.b_diag[n - 1]) - (w * w) / d;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double t = P.a_off[i - 1] - shift * P.b_off[i - 1];
    const double l = t / d;
    d = (P.a_diag[i] - shift * P.b_diag[i]) - l * t;
    if (std::fabs(d) < floor) d = -floor;
    if (d < 0.0) ++neg;
    const double c = (i + 2 == n) ? (P.a_off[n - 2] - shift * P.b_off[n - 2]) : 0.0;
    w = c - l * w;
    schur = schur - (w * w) / d;
  }
  if (schur < 0.0) ++neg;
  return neg;
}

void pencil_negative_count4(const CyclicPencil& P, const double* shifts, int* counts) {
  for (int k = 0; k < 4; ++k) counts[k] = pencil_count_one(P, shifts[k]);
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar",        periodic_d1,     periodic_d2,
                                 sum_norm3,       dot,             dot3,
                                 nearest_segment, sphere_candidates, pencil_negative_count4};
  return table;
}

}  // namespace geolab::kernels
