#pragma once

namespace certbound {

// Scaled complementary error function exp(x^2) erfc(x). Accurate to about
// 1e-15 relative for x >= 0; negative x is handled through erfc.
double erfcx(double x);

// Upper tail of the standard normal, Q(v) = P[Z > v].
double gaussian_q(double v);

// Lower tail, Phi(v) = Q(-v).
double gaussian_cdf(double v);

// ln Q(v), finite for all finite v.
double log_gaussian_q(double v);

// ln(exp(u) * Q(v)) without forming either factor.
double log_exp_times_q(double u, double v);

}  // namespace certbound
