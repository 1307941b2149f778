#pragma once

#include <array>
#include <cmath>

namespace geolab {

// Points on level-set surfaces are ambient (x1, x2, x3); chart points use
// (u, v, 0) so that both kinds share one value type.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_ = 0.0) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return a / norm(a); }

// Symmetric 3x3, stored row-major. Used for level-set Hessians.
struct Sym3 {
  std::array<double, 9> m{};
  double operator()(int i, int j) const { return m[3 * i + j]; }
  double& operator()(int i, int j) { return m[3 * i + j]; }
  Vec3 apply(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  double quad(const Vec3& v) const { return dot(v, apply(v)); }
  static Sym3 diagonal(double a, double b, double c) {
    Sym3 s;
    s(0, 0) = a;
    s(1, 1) = b;
    s(2, 2) = c;
    return s;
  }
};

// Symmetric positive definite 2x2 tensor in some local frame.
struct Mat2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;

  double det() const { return a11 * a22 - a12 * a12; }
  double quad(double u, double v) const { return a11 * u * u + 2.0 * a12 * u * v + a22 * v * v; }
  double inner(double u1, double v1, double u2, double v2) const {
    return a11 * u1 * u2 + a12 * (u1 * v2 + v1 * u2) + a22 * v1 * v2;
  }
  Mat2 inverse() const {
    const double d = det();
    return {a22 / d, -a12 / d, a11 / d};
  }
  // Eigenvalues in ascending order.
  std::array<double, 2> eigenvalues() const {
    const double mean = 0.5 * (a11 + a22);
    const double r = std::hypot(0.5 * (a11 - a22), a12);
    return {mean - r, mean + r};
  }
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace geolab
