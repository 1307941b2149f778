#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation; an AVX2 variant is selected at runtime when the CPU
// supports it. Both variants perform the same IEEE operations per element
// (no FMA contraction), so element-wise kernels agree bit-for-bit and only
// the reductions differ by summation order.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "geolab/vec.hpp"

namespace geolab::kernels {

// Segments of a polyline in structure-of-arrays layout. Segment i runs from
// (x0[i], y0[i], z0[i]) to that point plus (dx[i], dy[i], dz[i]).
struct SegmentSoA {
  std::vector<double> x0, y0, z0;
  std::vector<double> dx, dy, dz;
  std::vector<double> len2;              // |d|^2
  std::vector<double> cx, cy, cz, rad;   // bounding sphere of each segment

  std::size_t size() const { return x0.size(); }
  static SegmentSoA from_points(std::span<const Vec3> points, bool closed);
};

struct SegmentHit {
  double dist2 = 0.0;   // squared distance to the closest point
  std::size_t index = 0;
  double param = 0.0;   // position along the segment, in [0, 1]
};

// Cyclic symmetric tridiagonal pencil (A, B). Entry i of an off-diagonal
// couples rows i and (i + 1) mod n, so the last entry is the corner term.
struct CyclicPencil {
  std::vector<double> a_diag, a_off;
  std::vector<double> b_diag, b_off;
  double pivot_floor = 1e-300;

  std::size_t size() const { return a_diag.size(); }
};

struct KernelTable {
  std::string_view name;

  // Fourth-order central differences on a periodic uniform grid.
  void (*periodic_d1)(std::span<const double> f, double h, std::span<double> out);
  void (*periodic_d2)(std::span<const double> f, double h, std::span<double> out);

  // sum_i sqrt(x_i^2 + y_i^2 + z_i^2)
  double (*sum_norm3)(std::span<const double> x, std::span<const double> y,
                      std::span<const double> z);
  // sum_i a_i * b_i
  double (*dot)(std::span<const double> a, std::span<const double> b);
  // sum_i a_i * b_i * c_i
  double (*dot3)(std::span<const double> a, std::span<const double> b,
                 std::span<const double> c);

  SegmentHit (*nearest_segment)(const Vec3& p, const SegmentSoA& segs);

  // Indices j whose bounding sphere lies within `tol` of the sphere (center, radius).
  void (*sphere_candidates)(const Vec3& center, double radius, const SegmentSoA& segs,
                            double tol, std::vector<std::size_t>& out);

  // counts[k] = number of negative eigenvalues of A - shifts[k] * B, k < 4.
  void (*pencil_negative_count4)(const CyclicPencil& pencil, const double* shifts, int* counts);
};

const KernelTable& scalar();
// Null when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2();
// AVX2 if available, unless GEOLAB_SIMD=scalar is set in the environment.
const KernelTable& active();

}  // namespace geolab::kernels
