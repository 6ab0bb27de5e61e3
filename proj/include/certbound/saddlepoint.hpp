#pragma once

#include <cstddef>
#include <string_view>

#include "certbound/distribution.hpp"

namespace certbound {

enum class EnvelopeMethod { BerryEsseen, SaddlepointThm2, SaddlepointThm3 };

std::string_view to_string(EnvelopeMethod method);

// Interval around an approximation of P[S_n <= a], clipped to [0, 1].
struct BoundEnvelope {
  double center = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double radius = 0.0;
  double log_radius = 0.0;
  EnvelopeMethod method = EnvelopeMethod::SaddlepointThm3;
};

struct SaddlepointSolve {
  double theta_star = 0.0;
  double a = 0.0;
  std::size_t n = 0;
  double residual = 0.0;  // n k1(theta*) - a
  int iterations = 0;
  TiltedMoments moments;
};

inline constexpr int kMaxSolverIterations = 200;

// Solves n K'(theta) = a. Throws OutOfHull when a/n is not strictly inside
// (min support, max support) and NoConvergence after 200 iterations.
SaddlepointSolve solve_theta_star(const Distribution& dist, std::size_t n, double a);

// Exact-tilt normal approximation of P[S_n <= a] evaluated at an arbitrary theta.
double eta(const Distribution& dist, double theta, double a, std::size_t n);
double eta(const TiltedMoments& m, double a, std::size_t n);

double saddlepoint_cdf(const Distribution& dist, std::size_t n, double a);
double saddlepoint_pdf(const Distribution& dist, std::size_t n, double x, bool correction = false);

BoundEnvelope thm2_envelope(const Distribution& dist, double theta, double a, std::size_t n);
BoundEnvelope thm3_envelope(const Distribution& dist, std::size_t n, double a);
BoundEnvelope berry_esseen_envelope(const Distribution& dist, std::size_t n, double a);

// n K(theta*) - theta* a.
double exponent_h(const Distribution& dist, std::size_t n, double a);

}  // namespace certbound
