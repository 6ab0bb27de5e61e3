#include "certbound/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "certbound/error.hpp"
#include "certbound/gaussian.hpp"

namespace certbound {
namespace {

constexpr double kMergeTolerance = 1e-12;
constexpr std::size_t kMaxPairs = 50'000'000;

Distribution convolve_pair(const Distribution& x, const Distribution& y) {
  const std::size_t pairs = x.size() * y.size();
  if (pairs > kMaxPairs) throw Error(ErrorCode::TooLarge, fmt::format("{} support pairs", pairs));
  std::vector<std::pair<double, double>> pts;
  pts.reserve(pairs);
  const auto xv = x.values();
  const auto xw = x.log_weights();
  const auto yv = y.values();
  const auto yw = y.log_weights();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    for (std::size_t j = 0; j < yv.size(); ++j) pts.emplace_back(xv[i] + yv[j], xw[i] + yw[j]);
  }
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  const double scale = std::max({std::abs(pts.front().first), std::abs(pts.back().first), 1e-300});
  const double tol = kMergeTolerance * scale;
  std::vector<double> values;
  std::vector<double> lws;
  for (const auto& [v, lw] : pts) {
    if (!values.empty() && v - values.back() <= tol) {
      double& acc = lws.back();
      const double hi = std::max(acc, lw);
      acc = hi + std::log1p(std::exp(std::min(acc, lw) - hi));
    } else {
      values.push_back(v);
      lws.push_back(lw);
    }
  }
  if (values.size() > kMaxConvolutionSupport) {
    throw Error(ErrorCode::TooLarge, fmt::format("{} support points after merging", values.size()));
  }
  return Distribution::from_log_weights(std::move(values), std::move(lws));
}

double log_binomial_pmf(std::size_t n, double log_p, double log_q, std::size_t k) {
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * log_p +
         (nd - kd) * log_q;
}

double log_binomial_range(std::size_t n, double p, std::size_t first, std::size_t last) {
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  std::vector<double> terms;
  terms.reserve(last - first + 1);
  for (std::size_t k = first; k <= last; ++k) terms.push_back(log_binomial_pmf(n, log_p, log_q, k));
  return log_sum_exp(terms);
}

void check_binomial(std::size_t n, double p) {
  if (n == 0 || !(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::BadParams, fmt::format("binomial(n={}, p={})", n, p));
  }
}

}  // namespace

Distribution convolve_sum(const Distribution& dist, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::BadParams, "n must be positive");
  if (dist.kind() != DistributionKind::ExactDiscrete) {
    throw Error(ErrorCode::BadParams, "convolution requires an exact discrete distribution");
  }
  Distribution acc = dist;
  for (std::size_t i = 1; i < n; ++i) acc = convolve_pair(acc, dist);
  return acc;
}

double log_binomial_cdf(std::size_t n, double p, long long k) {
  check_binomial(n, p);
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (k >= static_cast<long long>(n)) return 0.0;
  return log_binomial_range(n, p, 0, static_cast<std::size_t>(k));
}

double log_binomial_sf(std::size_t n, double p, long long k) {
  check_binomial(n, p);
  if (k <= 0) return 0.0;
  if (k > static_cast<long long>(n)) return -std::numeric_limits<double>::infinity();
  return log_binomial_range(n, p, static_cast<std::size_t>(k), n);
}

double regularized_gamma_p(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0)) throw Error(ErrorCode::BadParams, fmt::format("P(s={}, x={})", s, x));
  return boost::math::gamma_p(s, x);
}

double exact_cdf(const ExactFamily& family, double a) {
  if (std::isnan(a)) throw Error(ErrorCode::BadParams, "threshold is NaN");
  return std::visit(
      [a](const auto& law) -> double {
        using Law = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<Law, BinomialLaw>) {
          check_binomial(law.n, law.p);
          const double k = std::floor(a);
          if (k < 0.0) return 0.0;
          if (k >= static_cast<double>(law.n)) return 1.0;
          return std::exp(log_binomial_cdf(law.n, law.p, static_cast<long long>(k)));
        } else if constexpr (std::is_same_v<Law, GammaLaw>) {
          if (!(law.shape > 0.0) || !(law.scale > 0.0)) {
            throw Error(ErrorCode::BadParams, fmt::format("gamma(shape={}, scale={})", law.shape, law.scale));
          }
          if (a <= 0.0) return 0.0;
          if (std::isinf(a)) return 1.0;
          return regularized_gamma_p(law.shape, a / law.scale);
        } else {
          if (!(law.variance > 0.0) || !std::isfinite(law.mean)) {
            throw Error(ErrorCode::BadParams, fmt::format("gaussian(mean={}, variance={})", law.mean, law.variance));
          }
          return gaussian_cdf((a - law.mean) / std::sqrt(law.variance));
        }
      },
      family);
}

}  // namespace certbound
