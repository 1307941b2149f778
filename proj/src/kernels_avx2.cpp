#include "kernels_impl.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace geolab::kernels {
namespace {

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

void periodic_d1(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  const double inv = 1.0 / (12.0 * h);
  auto edge = [&](std::size_t i) {
    const double fm2 = f[(i + n - 2) % n];
    const double fm1 = f[(i + n - 1) % n];
    const double fp1 = f[(i + 1) % n];
    const double fp2 = f[(i + 2) % n];
    out[i] = ((fm2 - fp2) + 8.0 * (fp1 - fm1)) * inv;
  };
  const __m256d vinv = _mm256_set1_pd(inv);
  const __m256d eight = _mm256_set1_pd(8.0);
  std::size_t i = 0;
  for (; i < 2 && i < n; ++i) edge(i);
  const double* p = f.data();
  for (; i + 4 + 2 <= n; i += 4) {
    const __m256d fm2 = _mm256_loadu_pd(p + i - 2);
    const __m256d fm1 = _mm256_loadu_pd(p + i - 1);
    const __m256d fp1 = _mm256_loadu_pd(p + i + 1);
    const __m256d fp2 = _mm256_loadu_pd(p + i + 2);
    const __m256d num =
        _mm256_add_pd(_mm256_sub_pd(fm2, fp2), _mm256_mul_pd(eight, _mm256_sub_pd(fp1, fm1)));
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(num, vinv));
  }
  for (; i < n; ++i) edge(i);
}

void periodic_d2(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  const double inv = 1.0 / (12.0 * h * h);
  auto edge = [&](std::size_t i) {
    const double fm2 = f[(i + n - 2) % n];
    const double fm1 = f[(i + n - 1) % n];
    const double fp1 = f[(i + 1) % n];
    const double fp2 = f[(i + 2) % n];
    out[i] = ((16.0 * (fm1 + fp1) - (fm2 + fp2)) - 30.0 * f[i]) * inv;
  };
  const __m256d vinv = _mm256_set1_pd(inv);
  const __m256d c16 = _mm256_set1_pd(16.0);
  const __m256d c30 = _mm256_set1_pd(30.0);
  std::size_t i = 0;
  for (; i < 2 && i < n; ++i) edge(i);
  const double* p = f.data();
  for (; i + 4 + 2 <= n; i += 4) {
    const __m256d fm2 = _mm256_loadu_pd(p + i - 2);
    const __m256d fm1 = _mm256_loadu_pd(p + i - 1);
    const __m256d f0 = _mm256_loadu_pd(p + i);
    const __m256d fp1 = _mm256_loadu_pd(p + i + 1);
    const __m256d fp2 = _mm256_loadu_pd(p + i + 2);
    const __m256d num = _mm256_sub_pd(
        _mm256_sub_pd(_mm256_mul_pd(c16, _mm256_add_pd(fm1, fp1)), _mm256_add_pd(fm2, fp2)),
        _mm256_mul_pd(c30, f0));
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(num, vinv));
  }
  for (; i < n; ++i) edge(i);
}

double sum_norm3(std::span<const double> x, std::span<const double> y, std::span<const double> z) {
  const std::size_t n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x.data() + i);
    const __m256d vy = _mm256_loadu_pd(y.data() + i);
    const __m256d vz = _mm256_loadu_pd(z.data() + i);
    const __m256d s = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(vx, vx), _mm256_mul_pd(vy, vy)),
                                    _mm256_mul_pd(vz, vz));
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(s));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += std::sqrt((x[i] * x[i] + y[i] * y[i]) + z[i] * z[i]);
  return total;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i),
                                           _mm256_loadu_pd(b.data() + i)));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double dot3(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ab =
        _mm256_mul_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(ab, _mm256_loadu_pd(c.data() + i)));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += (a[i] * b[i]) * c[i];
  return total;
}

SegmentHit nearest_segment(const Vec3& p, const SegmentSoA& s) {
  const std::size_t n = s.size();
  const __m256d px = _mm256_set1_pd(p.x);
  const __m256d py = _mm256_set1_pd(p.y);
  const __m256d pz = _mm256_set1_pd(p.z);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d best = _mm256_set1_pd(HUGE_VAL);
  __m256d best_idx = zero;
  __m256d best_t = zero;
  __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d four = _mm256_set1_pd(4.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d ax = _mm256_loadu_pd(s.x0.data() + j);
    const __m256d ay = _mm256_loadu_pd(s.y0.data() + j);
    const __m256d az = _mm256_loadu_pd(s.z0.data() + j);
    const __m256d dx = _mm256_loadu_pd(s.dx.data() + j);
    const __m256d dy = _mm256_loadu_pd(s.dy.data() + j);
    const __m256d dz = _mm256_loadu_pd(s.dz.data() + j);
    const __m256d l2 = _mm256_loadu_pd(s.len2.data() + j);
    const __m256d wx = _mm256_sub_pd(px, ax);
    const __m256d wy = _mm256_sub_pd(py, ay);
    const __m256d wz = _mm256_sub_pd(pz, az);
    const __m256d num = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(wx, dx), _mm256_mul_pd(wy, dy)),
                                      _mm256_mul_pd(wz, dz));
    __m256d t = _mm256_div_pd(num, l2);
    t = _mm256_blendv_pd(zero, t, _mm256_cmp_pd(l2, zero, _CMP_GT_OQ));
    t = _mm256_blendv_pd(t, zero, _mm256_cmp_pd(t, zero, _CMP_LT_OQ));
    t = _mm256_blendv_pd(t, one, _mm256_cmp_pd(t, one, _CMP_GT_OQ));
    const __m256d ex = _mm256_sub_pd(px, _mm256_add_pd(ax, _mm256_mul_pd(t, dx)));
    const __m256d ey = _mm256_sub_pd(py, _mm256_add_pd(ay, _mm256_mul_pd(t, dy)));
    const __m256d ez = _mm256_sub_pd(pz, _mm256_add_pd(az, _mm256_mul_pd(t, dz)));
    const __m256d d2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey)),
                                     _mm256_mul_pd(ez, ez));
    const __m256d better = _mm256_cmp_pd(d2, best, _CMP_LT_OQ);
    best = _mm256_blendv_pd(best, d2, better);
    best_idx = _mm256_blendv_pd(best_idx, idx, better);
    best_t = _mm256_blendv_pd(best_t, t, better);
    idx = _mm256_add_pd(idx, four);
  }
  alignas(32) double bd[4], bi[4], bt[4];
  _mm256_store_pd(bd, best);
  _mm256_store_pd(bi, best_idx);
  _mm256_store_pd(bt, best_t);
  SegmentHit hit{HUGE_VAL, 0, 0.0};
  for (int k = 0; k < 4; ++k) {
    const auto index = static_cast<std::size_t>(bi[k]);
    if (bd[k] < hit.dist2 || (bd[k] == hit.dist2 && index < hit.index)) hit = {bd[k], index, bt[k]};
  }
  for (; j < n; ++j) {
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
    if (d2 < hit.dist2) hit = {d2, j, t};
  }
  return hit;
}

void sphere_candidates(const Vec3& c, double radius, const SegmentSoA& s, double tol,
                       std::vector<std::size_t>& out) {
  out.clear();
  const std::size_t n = s.size();
  const __m256d vx = _mm256_set1_pd(c.x);
  const __m256d vy = _mm256_set1_pd(c.y);
  const __m256d vz = _mm256_set1_pd(c.z);
  const __m256d vr = _mm256_set1_pd(radius);
  const __m256d vt = _mm256_set1_pd(tol);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d ex = _mm256_sub_pd(_mm256_loadu_pd(s.cx.data() + j), vx);
    const __m256d ey = _mm256_sub_pd(_mm256_loadu_pd(s.cy.data() + j), vy);
    const __m256d ez = _mm256_sub_pd(_mm256_loadu_pd(s.cz.data() + j), vz);
    const __m256d r = _mm256_add_pd(_mm256_add_pd(vr, _mm256_loadu_pd(s.rad.data() + j)), vt);
    const __m256d d2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey)),
                                     _mm256_mul_pd(ez, ez));
    int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, _mm256_mul_pd(r, r), _CMP_LE_OQ));
    while (mask != 0) {
      const int bit = __builtin_ctz(static_cast<unsigned>(mask));
      out.push_back(j + static_cast<std::size_t>(bit));
      mask &= mask - 1;
    }
  }
  for (; j < n; ++j) {
    const double ex = s.cx[j] - c.x;
    const double ey = s.cy[j] - c.y;
    const double ez = s.cz[j] - c.z;
    const double r = (radius + s.rad[j]) + tol;
    if ((ex * ex + ey * ey) + ez * ez <= r * r) out.push_back(j);
  }
}

// Four shifts advance through the same bordered LDL^T recursion in lockstep.
void pencil_negative_count4(const CyclicPencil& P, const double* shifts, int* counts) {
  const std::size_t n = P.size();
  const __m256d s = _mm256_loadu_pd(shifts);
  const __m256d floor = _mm256_set1_pd(P.pivot_floor);
  const __m256d neg_floor = _mm256_set1_pd(-P.pivot_floor);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  auto entry = [&](double a, double b) {
    return _mm256_sub_pd(_mm256_set1_pd(a), _mm256_mul_pd(s, _mm256_set1_pd(b)));
  };
  auto guard = [&](__m256d d) {
    return _mm256_blendv_pd(d, neg_floor, _mm256_cmp_pd(vabs(d), floor, _CMP_LT_OQ));
  };
  auto is_neg = [&](__m256d d) { return _mm256_and_pd(_mm256_cmp_pd(d, zero, _CMP_LT_OQ), one); };

  __m256d d = guard(entry(P.a_diag[0], P.b_diag[0]));
  __m256d neg = is_neg(d);
  __m256d w = entry(P.a_off[n - 1], P.b_off[n - 1]);
  __m256d schur =
      _mm256_sub_pd(entry(P.a_diag[n - 1], P.b_diag[n - 1]), _mm256_div_pd(_mm256_mul_pd(w, w), d));
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const __m256d t = entry(P.a_off[i - 1], P.b_off[i - 1]);
    const __m256d l = _mm256_div_pd(t, d);
    d = guard(_mm256_sub_pd(entry(P.a_diag[i], P.b_diag[i]), _mm256_mul_pd(l, t)));
    neg = _mm256_add_pd(neg, is_neg(d));
    const __m256d c = (i + 2 == n) ? entry(P.a_off[n - 2], P.b_off[n - 2]) : zero;
    w = _mm256_sub_pd(c, _mm256_mul_pd(l, w));
    schur = _mm256_sub_pd(schur, _mm256_div_pd(_mm256_mul_pd(w, w), d));
  }
  neg = _mm256_add_pd(neg, is_neg(schur));
  alignas(32) double out[4];
  _mm256_store_pd(out, neg);
  for (int k = 0; k < 4; ++k) counts[k] = static_cast<int>(out[k]);
}

}  // namespace

namespace detail {
const KernelTable* avx2_table() {
  static const KernelTable table{"avx2",          periodic_d1,       periodic_d2,
                                 sum_norm3,       dot,               dot3,
                                 nearest_segment, sphere_candidates, pencil_negative_count4};
  return &table;
}
}  // namespace detail

}  // namespace geolab::kernels

#else

namespace geolab::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace geolab::kernels::detail

#endif
