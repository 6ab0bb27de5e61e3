#include "certbound/gaussian.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace certbound {
namespace {

// Rational Chebyshev approximations of W. J. Cody (Math. Comp. 1969),
// the coefficient sets of the CALERF routine.
constexpr double kA[5] = {3.1611237438705656, 113.864154151050156, 377.485237685302021, 3209.37758913846947,
                          0.185777706184603153};
constexpr double kB[4] = {23.6012909523441209, 244.024637934444173, 1282.61652607737228, 2844.23683343917062};
constexpr double kC[9] = {0.564188496988670089, 8.88314979438837594, 66.1191906371416295,
                          298.635138197400131,  881.95222124176909,  1712.04761263407058,
                          2051.07837782607147,  1230.33935479799725, 2.15311535474403846e-8};
constexpr double kD[8] = {15.7449261107098347, 117.693950891312499, 537.181101862009858, 1621.38957456669019,
                          3290.79923573345963, 4362.61909014324716, 3439.36767414372164, 1230.33935480374942};
constexpr double kP[6] = {0.305326634961232344, 0.360344899949804439, 0.125781726111229246,
                          0.0160837851487422766, 6.58749161529837803e-4, 0.0163153871373020978};
constexpr double kQ[5] = {2.56852019228982242, 1.87295284992346047, 0.527905102951428412, 0.0605183413124413191,
                          0.00233520497626869185};

constexpr double kInvSqrtPi = 0.56418958354775628695;
constexpr double kThreshold = 0.46875;
constexpr double kHuge = 6.71e7;

// erf(x) for |x| <= 0.46875.
double erf_small(double x) {
  const double ysq = x * x;
  double num = kA[4] * ysq;
  double den = ysq;
  for (int i = 0; i < 3; ++i) {
    num = (num + kA[i]) * ysq;
    den = (den + kB[i]) * ysq;
  }
  return x * (num + kA[3]) / (den + kB[3]);
}

// erfcx(y) for y > 0.46875.
double erfcx_large(double y) {
  if (y <= 4.0) {
    double num = kC[8] * y;
    double den = y;
    for (int i = 0; i < 7; ++i) {
      num = (num + kC[i]) * y;
      den = (den + kD[i]) * y;
    }
    return (num + kC[7]) / (den + kD[7]);
  }
  if (y >= kHuge) return kInvSqrtPi / y;
  const double ysq = 1.0 / (y * y);
  double num = kP[5] * ysq;
  double den = ysq;
  for (int i = 0; i < 4; ++i) {
    num = (num + kP[i]) * ysq;
    den = (den + kQ[i]) * ysq;
  }
  const double r = ysq * (num + kP[4]) / (den + kQ[4]);
  return (kInvSqrtPi - r) / y;
}

// exp(-y^2) with the square split so the rounding of y^2 does not leak into
// the exponent.
double exp_minus_square(double y) {
  const double head = std::trunc(y * 16.0) / 16.0;
  const double del = (y - head) * (y + head);
  return std::exp(-head * head) * std::exp(-del);
}

// erfc(x) for x >= 0.
double erfc_nonneg(double x) {
  if (x <= kThreshold) return 1.0 - erf_small(x);
  if (x >= 26.6) return 0.0;
  return exp_minus_square(x) * erfcx_large(x);
}

}  // namespace

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) {
    if (x < -26.6) return std::numeric_limits<double>::infinity();
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x <= kThreshold) return std::exp(x * x) * (1.0 - erf_small(x));
  return erfcx_large(x);
}

double gaussian_q(double v) {
  if (std::isnan(v)) return v;
  const double x = std::abs(v) * (1.0 / std::numbers::sqrt2);
  const double upper = 0.5 * erfc_nonneg(x);
  return v >= 0.0 ? upper : 1.0 - upper;
}

double gaussian_cdf(double v) { return gaussian_q(-v); }

double log_gaussian_q(double v) {
  if (std::isnan(v)) return v;
  if (v == std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  if (v >= 0.0) return -0.5 * v * v + std::log(0.5 * erfcx(v * (1.0 / std::numbers::sqrt2)));
  return std::log1p(-gaussian_q(-v));
}

double log_exp_times_q(double u, double v) { return u + log_gaussian_q(v); }

}  // namespace certbound
