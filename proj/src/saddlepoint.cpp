#include "certbound/saddlepoint.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "certbound/error.hpp"
#include "certbound/gaussian.hpp"

namespace certbound {

std::string_view to_string(EnvelopeMethod method) {
  switch (method) {
    case EnvelopeMethod::BerryEsseen: return "berry_esseen";
    case EnvelopeMethod::SaddlepointThm2: return "saddlepoint_thm2";
    case EnvelopeMethod::SaddlepointThm3: return "saddlepoint_thm3";
  }
  return "unknown";
}

namespace {

constexpr double kMaxLogRadius = 700.0;
constexpr int kMaxBracketDoublings = 1100;

void require_n(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::BadParams, "n must be positive");
}

BoundEnvelope make_envelope(double center, double log_radius, EnvelopeMethod method) {
  BoundEnvelope env;
  env.center = center;
  env.log_radius = log_radius;
  env.radius = std::exp(std::min(log_radius, kMaxLogRadius));
  env.lower = std::clamp(center - env.radius, 0.0, 1.0);
  env.upper = std::clamp(center + env.radius, 0.0, 1.0);
  env.method = method;
  return env;
}

BoundEnvelope tilted_envelope(const TiltedMoments& m, double a, std::size_t n, EnvelopeMethod method) {
  const double nd = static_cast<double>(n);
  const double factor = std::min(1.0, 2.0 * m.xi / std::sqrt(nd));
  return make_envelope(eta(m, a, n), nd * m.k - m.theta * a + std::log(factor), method);
}

}  // namespace

SaddlepointSolve solve_theta_star(const Distribution& dist, std::size_t n, double a) {
  require_n(n);
  if (!std::isfinite(a)) throw Error(ErrorCode::BadParams, "threshold must be finite");
  const double nd = static_cast<double>(n);
  const double target = a / nd;
  if (!(target > dist.min_value() && target < dist.max_value())) {
    throw Error(ErrorCode::OutOfHull, fmt::format("a/n={} outside ({}, {})", target, dist.min_value(), dist.max_value()));
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(a));

  SaddlepointSolve out;
  out.a = a;
  out.n = n;
  auto accept = [&](const TiltedMoments& m, int iterations) {
    out.theta_star = m.theta;
    out.moments = m;
    out.residual = nd * m.k1 - a;
    out.iterations = iterations;
    return out;
  };

  TiltedMoments m = tilted_moments(dist, 0.0);
  if (std::abs(nd * m.k1 - a) <= tol) return accept(m, 0);

  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; tilted_moments(dist, hi).k1 <= target; ++i) {
    if (i == kMaxBracketDoublings) throw Error(ErrorCode::NoConvergence, "bracket expansion failed");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; tilted_moments(dist, lo).k1 >= target; ++i) {
    if (i == kMaxBracketDoublings) throw Error(ErrorCode::NoConvergence, "bracket expansion failed");
    hi = lo;
    lo *= 2.0;
  }

  double theta = (lo < 0.0 && hi > 0.0) ? 0.0 : 0.5 * (lo + hi);
  for (int it = 1; it <= kMaxSolverIterations; ++it) {
    m = tilted_moments(dist, theta);
    const double f = nd * m.k1 - a;
    if (std::abs(f) <= tol) return accept(m, it);
    if (f < 0.0) {
      lo = theta;
    } else {
      hi = theta;
    }
    double next = theta - f / (nd * m.k2);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == theta) break;
    theta = next;
  }
  throw Error(ErrorCode::NoConvergence, fmt::format("saddlepoint equation unsolved for a={}, n={}", a, n));
}

double eta(const TiltedMoments& m, double a, std::size_t n) {
  require_n(n);
  const double nd = static_cast<double>(n);
  const double theta = m.theta;
  const double s = std::sqrt(nd * m.k2);
  const double arg = (a + nd * theta * m.k2 - nd * m.k1) / s;
  const double u = 0.5 * nd * theta * theta * m.k2 + nd * m.k - nd * theta * m.k1;
  double value;
  if (theta > 0.0) {
    value = 1.0 - std::exp(log_exp_times_q(u, arg));
  } else {
    value = std::exp(log_exp_times_q(u, -arg));
  }
  return std::clamp(value, 0.0, 1.0);
}

double eta(const Distribution& dist, double theta, double a, std::size_t n) {
  return eta(tilted_moments(dist, theta), a, n);
}

double saddlepoint_cdf(const Distribution& dist, std::size_t n, double a) {
  return eta(solve_theta_star(dist, n, a).moments, a, n);
}

double saddlepoint_pdf(const Distribution& dist, std::size_t n, double x, bool correction) {
  const SaddlepointSolve sol = solve_theta_star(dist, n, x);
  const TiltedMoments& m = sol.moments;
  const double nd = static_cast<double>(n);
  double value = std::exp(nd * m.k - m.theta * x) / std::sqrt(2.0 * std::numbers::pi * nd * m.k2);
  if (correction) {
    const double k2sq = m.k2 * m.k2;
    const double k4 = m.c4 - 3.0 * k2sq;
    value *= 1.0 + (k4 / (8.0 * k2sq) - 5.0 * m.c3 * m.c3 / (24.0 * k2sq * m.k2)) / nd;
  }
  return value;
}

BoundEnvelope thm2_envelope(const Distribution& dist, double theta, double a, std::size_t n) {
  require_n(n);
  return tilted_envelope(tilted_moments(dist, theta), a, n, EnvelopeMethod::SaddlepointThm2);
}

BoundEnvelope thm3_envelope(const Distribution& dist, std::size_t n, double a) {
  const SaddlepointSolve sol = solve_theta_star(dist, n, a);
  return tilted_envelope(sol.moments, a, n, EnvelopeMethod::SaddlepointThm3);
}

BoundEnvelope berry_esseen_envelope(const Distribution& dist, std::size_t n, double a) {
  require_n(n);
  const TiltedMoments m = tilted_moments(dist, 0.0);
  const double nd = static_cast<double>(n);
  const double center = gaussian_cdf((a - nd * m.k1) / std::sqrt(nd * m.k2));
  const double radius = std::min(1.0, m.xi / std::sqrt(nd));
  return make_envelope(center, std::log(radius), EnvelopeMethod::BerryEsseen);
}

double exponent_h(const Distribution& dist, std::size_t n, double a) {
  const SaddlepointSolve sol = solve_theta_star(dist, n, a);
  const double h = static_cast<double>(n) * sol.moments.k - sol.theta_star * a;
  return std::min(h, 0.0);
}

}  // namespace certbound
