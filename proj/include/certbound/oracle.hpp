#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>

#include "certbound/distribution.hpp"

namespace certbound {

inline constexpr std::size_t kMaxConvolutionSupport = 1'000'000;

// Law of the sum of n iid copies, by n - 1 direct convolutions. Values within
// 1e-12 of each other (relative to the support scale) are merged.
Distribution convolve_sum(const Distribution& dist, std::size_t n);

struct BinomialLaw {
  std::size_t n = 0;
  double p = 0.5;
};
struct GammaLaw {
  double shape = 1.0;
  double scale = 1.0;
};
struct GaussianLaw {
  double mean = 0.0;
  double variance = 1.0;
};
using ExactFamily = std::variant<BinomialLaw, GammaLaw, GaussianLaw>;

double exact_cdf(const ExactFamily& family, double a);

// ln P[Bin(n, p) <= k] and ln P[Bin(n, p) >= k]; -inf for empty events.
double log_binomial_cdf(std::size_t n, double p, long long k);
double log_binomial_sf(std::size_t n, double p, long long k);

// Regularized lower incomplete gamma P(s, x).
double regularized_gamma_p(double s, double x);

struct McEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::uint64_t seed = 0;
};

// Monte Carlo estimate of P[S_n <= a]. Samples are split into fixed shards
// with derived seeds, so the result does not depend on the thread count.
McEstimate mc_cdf(const Distribution& dist, std::size_t n, double a, std::size_t samples,
                  std::uint64_t seed, unsigned threads = 1);

// Monte Carlo estimate of P[i_n <= threshold] for an information density law.
McEstimate mc_fbl(const Distribution& density, std::size_t n, double threshold_log, std::size_t samples,
                  std::uint64_t seed, unsigned threads = 1);

struct McFblTerms {
  McEstimate joint_cdf;      // P[i_n <= t] under the joint law
  McEstimate scaled_ind_sf;  // e^t P[i_n > t] under the product law
  McEstimate sum;            // joint_cdf + scaled_ind_sf
};

// Both probability terms of the dependence-testing and meta-converse
// expressions from one set of joint samples. The product-law term uses the
// weight exp(t - i_n), since dP_ind/dP_joint = exp(-i_n).
McFblTerms mc_fbl_terms(const Distribution& density, std::size_t n, double threshold_log, std::size_t samples,
                        std::uint64_t seed, unsigned threads = 1);

}  // namespace certbound
