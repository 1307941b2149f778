#include <algorithm>
#include <cstdlib>
#include <string_view>

#include "geolab/kernels.hpp"
#include "kernels_impl.hpp"

namespace geolab::kernels {

SegmentSoA SegmentSoA::from_points(std::span<const Vec3> points, bool closed) {
  SegmentSoA s;
  const std::size_t n = points.size();
  const std::size_t m = n < 2 ? 0 : (closed ? n : n - 1);
  for (auto* v : {&s.x0, &s.y0, &s.z0, &s.dx, &s.dy, &s.dz, &s.len2, &s.cx, &s.cy, &s.cz, &s.rad}) {
    v->resize(m);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3& a = points[i];
    const Vec3& b = points[(i + 1) % n];
    const Vec3 d = b - a;
    s.x0[i] = a.x;
    s.y0[i] = a.y;
    s.z0[i] = a.z;
    s.dx[i] = d.x;
    s.dy[i] = d.y;
    s.dz[i] = d.z;
    s.len2[i] = dot(d, d);
    s.cx[i] = 0.5 * (a.x + b.x);
    s.cy[i] = 0.5 * (a.y + b.y);
    s.cz[i] = 0.5 * (a.z + b.z);
    s.rad[i] = 0.5 * std::sqrt(s.len2[i]);
  }
  return s;
}

const KernelTable* avx2() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool cpu_ok = __builtin_cpu_supports("avx2");
  return cpu_ok ? detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("GEOLAB_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar();
    const KernelTable* fast = avx2();
    return fast != nullptr ? fast : &scalar();
  }();
  return *chosen;
}

}  // namespace geolab::kernels
