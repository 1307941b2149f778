#pragma once

#include <cmath>

namespace geolab {

// C-infinity transition: 0 for x <= 0, 1 for x >= 1, built from exp(-1/x).
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

// Plateau bump: 1 for |x| <= inner, 0 for |x| >= outer.
inline double plateau(double x, double inner, double outer) {
  return 1.0 - smooth_step((std::abs(x) - inner) / (outer - inner));
}

}  // namespace geolab
