#include "certbound/stable.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

#include "certbound/error.hpp"

namespace certbound {
namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

constexpr double kPi = std::numbers::pi;
constexpr double kEnvelopeCut = 40.0;  // exp(-40) ~ 4e-18
constexpr double kNearCauchy = 0.05;
constexpr double kFourierLimit = 50.0;
constexpr double kZolotarevStart = 1.0;
constexpr double kRelTol = 1e-12;

void check_args(double alpha, double sigma, double z) {
  if (!(alpha > 0.0 && alpha <= 2.0) || !(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(z)) {
    throw Error(ErrorCode::BadParams, fmt::format("stable(alpha={}, sigma={}) at z={}", alpha, sigma, z));
  }
}

constexpr double kAcceptedError = 1e-8;

template <typename F>
double integrate(F f, double a, double b, unsigned depth, double tol, double& err_sum) {
  double err = 0.0;
  const double value = Kronrod::integrate(f, a, b, depth, tol, &err);
  if (!std::isfinite(value)) throw Error(ErrorCode::QuadratureFailure, fmt::format("panel [{}, {}]", a, b));
  err_sum += err;
  return value;
}

// Double-exponential rule for integrands with power-law endpoint behaviour.
template <typename F>
double integrate_endpoints(F f, double a, double b, double& err_sum) {
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  double err = 0.0;
  const double value = rule.integrate(f, a, b, kRelTol, &err);
  if (!std::isfinite(value)) throw Error(ErrorCode::QuadratureFailure, fmt::format("panel [{}, {}]", a, b));
  err_sum += err;
  return value;
}

void check_error(double err, double scale, double x) {
  if (err > kAcceptedError * scale) {
    throw Error(ErrorCode::QuadratureFailure, fmt::format("error estimate {} against {} at x={}", err, scale, x));
  }
}

// (1/pi) int_0^inf exp(-s^alpha) cos(s x) ds, panels split at the zeros of cos(s x).
double fourier_standard(double alpha, double x) {
  const double s_max = std::pow(kEnvelopeCut, 1.0 / alpha);
  auto f = [alpha, x](double s) { return std::exp(-std::pow(s, alpha)) * std::cos(s * x); };
  double err = 0.0;
  if (x * s_max <= 0.5 * kPi) {
    const double total = integrate_endpoints(f, 0.0, s_max, err);
    check_error(err, total, x);
    return total / kPi;
  }
  const double period = kPi / x;
  double lo = 0.0;
  double hi = 0.5 * period;
  double total = 0.0;
  double first_panel = 0.0;
  for (bool first = true; lo < s_max; first = false) {
    const double top = std::min(hi, s_max);
    const double panel = first ? integrate_endpoints(f, lo, top, err) : integrate(f, lo, top, 15, kRelTol, err);
    if (first) first_panel = panel;
    total += panel;
    lo = hi;
    hi += period;
  }
  check_error(err, std::abs(first_panel), x);
  return total / kPi;
}

// Large-x expansion (1/pi) sum_k (-1)^{k+1} Gamma(alpha k + 1)/k! sin(k pi alpha/2) x^{-alpha k - 1}.
// Returns NaN when the terms stop shrinking before reaching 1e-17 of the sum.
double tail_series(double alpha, double x) {
  double sum = 0.0;
  const double lx = std::log(x);
  double prev = INFINITY;
  for (int k = 1; k <= 200; ++k) {
    const double lmag = std::lgamma(alpha * k + 1.0) - std::lgamma(k + 1.0) - (alpha * k + 1.0) * lx;
    const double term = ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(lmag) * std::sin(k * kPi * alpha / 2.0);
    sum += term;
    const double mag = std::exp(lmag);
    if (mag < 1e-17 * std::abs(sum)) return sum / kPi;
    if (mag > prev) return NAN;
    prev = mag;
  }
  return NAN;
}

// Non-oscillatory integral representation of the symmetric stable density
// (Zolotarev; Nolan 1997), alpha != 1, x > 0:
//   f(x) = alpha / (pi |alpha - 1| x) int_0^{pi/2} u e^{-u} dtheta,
//   u(theta) = x^{alpha/(alpha-1)} V(theta),
//   V(theta) = (cos theta / sin(alpha theta))^{alpha/(alpha-1)} cos((alpha-1) theta) / cos theta.
double zolotarev_standard(double alpha, double x) {
  const double e = alpha / (alpha - 1.0);
  const double log_c = e * std::log(x);
  auto log_u = [alpha, e, log_c](double t) {
    return log_c + e * (std::log(std::cos(t)) - std::log(std::sin(alpha * t))) + std::log(std::cos((alpha - 1.0) * t)) -
           std::log(std::cos(t));
  };
  auto g = [&log_u](double t) {
    const double lu = log_u(t);
    if (!std::isfinite(lu)) return 0.0;
    return std::exp(lu - std::exp(lu));
  };
  const double half_pi = 0.5 * kPi;
  // u is monotone in theta; locate u = 1, where the integrand peaks.
  double lo = 0.0;
  double hi = half_pi;
  const bool decreasing = alpha > 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double lu = log_u(mid);
    if ((lu > 0.0) == decreasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double peak = 0.5 * (lo + hi);
  double total = 0.0;
  double err = 0.0;
  if (peak > 0.0) total += integrate_endpoints(g, 0.0, peak, err);
  if (peak < half_pi) total += integrate_endpoints(g, peak, half_pi, err);
  check_error(err, total, x);
  return alpha * total / (kPi * std::abs(alpha - 1.0) * x);
}

}  // namespace

double sas_density_fourier(double alpha, double sigma, double z) {
  check_args(alpha, sigma, z);
  return fourier_standard(alpha, std::abs(z) / sigma) / sigma;
}

double sas_density(double alpha, double sigma, double z) {
  check_args(alpha, sigma, z);
  const double x = std::abs(z) / sigma;
  double g;
  const bool near_cauchy = std::abs(alpha - 1.0) <= kNearCauchy;
  g = (x > kFourierLimit && alpha < 2.0) ? tail_series(alpha, x) : NAN;
  if (std::isnan(g)) {
    g = (near_cauchy || x < kZolotarevStart) ? fourier_standard(alpha, x) : zolotarev_standard(alpha, x);
  }
  return g / sigma;
}

}  // namespace certbound
