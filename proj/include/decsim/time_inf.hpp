#pragma once

#include <cmath>
#include <limits>

namespace decsim {

// Times and distances live in [0, +inf]. +inf is absorbing under addition
// and maximal under comparison; the helpers below keep products with zero
// from turning into NaN.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_inf(double x) { return std::isinf(x); }

// a * b with the convention 0 * inf = 0 (limits of "no work to do").
inline double mul0(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

// 1 / h with 1/0 = inf and 1/inf = 0.
inline double inv0(double h) {
  if (h == 0.0) return kInf;
  if (is_inf(h)) return 0.0;
  return 1.0 / h;
}

// Relative closeness, treating equal infinities as close.
inline bool nearly_equal(double a, double b, double rel_tol = 1e-12) {
  if (a == b) return true;
  if (is_inf(a) || is_inf(b)) return false;
  const double scale = std::fmax(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) <= rel_tol * scale;
}

}  // namespace decsim
