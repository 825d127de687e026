#pragma once

#include <algorithm>
#include <cmath>

// Numerically guarded scalar kernels shared by the geometry ops and the
// autodiff primitives. Each ratio that degenerates to 0/0 switches to a
// short Taylor series below a fixed threshold; thresholds are chosen so
// the truncation error sits below double rounding error at the switch.

namespace hyprown::scalar {

// Series kick in when r = sqrt(s) drops below 1e-4, i.e. s below 1e-8.
inline constexpr double kSeriesThresholdSq = 1e-8;
inline constexpr double kSeriesThreshold = 1e-4;

// sinh(r)/r as a function of s = r^2 (so it stays smooth through r = 0).
inline double sinhc_sq(double s) {
  if (s < kSeriesThresholdSq) {
    return 1.0 + s / 6.0 + s * s / 120.0 + s * s * s / 5040.0;
  }
  double r = std::sqrt(s);
  return std::sinh(r) / r;
}

// d/ds [sinh(sqrt(s))/sqrt(s)] = (r*cosh(r) - sinh(r)) / (2 r^3).
inline double d_sinhc_sq(double s) {
  if (s < kSeriesThresholdSq) {
    return 1.0 / 6.0 + s / 60.0 + s * s / 1680.0;
  }
  double r = std::sqrt(s);
  return (r * std::cosh(r) - std::sinh(r)) / (2.0 * r * r * r);
}

// cosh(sqrt(s)).
inline double cosh_sq(double s) {
  if (s < kSeriesThresholdSq) {
    return 1.0 + s / 2.0 + s * s / 24.0 + s * s * s / 720.0;
  }
  return std::cosh(std::sqrt(s));
}

// d/ds cosh(sqrt(s)) = sinh(r)/(2r).
inline double d_cosh_sq(double s) { return 0.5 * sinhc_sq(s); }

// log(sinh(r)/r) as a function of s = r^2. For r >= threshold the form
// r + log1p(-exp(-2r)) - log(2r) stays finite far beyond sinh overflow.
inline double log_sinhc_sq(double s) {
  if (s < kSeriesThresholdSq) {
    return s / 6.0 - s * s / 180.0 + s * s * s / 2835.0;
  }
  double r = std::sqrt(s);
  return r + std::log1p(-std::exp(-2.0 * r)) - std::log(2.0 * r);
}

// d/ds log(sinh(sqrt(s))/sqrt(s)) = coth(r)/(2r) - 1/(2s).
inline double d_log_sinhc_sq(double s) {
  if (s < kSeriesThresholdSq) {
    return 1.0 / 6.0 - s / 90.0 + s * s / 945.0;
  }
  double r = std::sqrt(s);
  return 1.0 / (2.0 * r * std::tanh(r)) - 1.0 / (2.0 * s);
}

// arcosh with the domain clamped to [1, inf); computed via the product
// form (a-1)(a+1) to avoid cancellation near 1.
inline double acosh_clamped(double a) {
  if (a <= 1.0) return 0.0;
  return std::log(a + std::sqrt((a - 1.0) * (a + 1.0)));
}

// arcosh(a) / sqrt(a^2 - 1), smooth through a = 1 (value 1 there).
inline double acosh_ratio(double a) {
  double b = a - 1.0;
  if (b < kSeriesThreshold) {
    if (b < 0.0) b = 0.0;
    return 1.0 - b / 3.0 + 2.0 * b * b / 15.0 - 2.0 * b * b * b / 35.0;
  }
  return acosh_clamped(a) / std::sqrt(b * (a + 1.0));
}

// d/da [arcosh(a)/sqrt(a^2-1)] = (sqrt(a^2-1) - a*arcosh(a)) / (a^2-1)^{3/2}.
inline double d_acosh_ratio(double a) {
  double b = a - 1.0;
  if (b < kSeriesThreshold) {
    if (b < 0.0) b = 0.0;
    return -1.0 / 3.0 + 4.0 * b / 15.0 - 6.0 * b * b / 35.0;
  }
  double q = std::sqrt(b * (a + 1.0));
  return (q - a * acosh_clamped(a)) / (q * q * q);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace hyprown::scalar
