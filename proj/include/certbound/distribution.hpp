#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace certbound {

enum class DistributionKind { ExactDiscrete, Quadrature };

// Provenance of a quadrature-discretized continuous law.
struct QuadratureSource {
  std::string law;
  std::size_t nodes = 0;
  double lower = 0.0;
  double upper = 0.0;
};

// Finite-support distribution stored as sorted values with log-weights that
// sum to one. Duplicate values are merged at construction.
class Distribution {
 public:
  static Distribution from_log_weights(std::vector<double> values, std::vector<double> log_weights,
                                       DistributionKind kind = DistributionKind::ExactDiscrete,
                                       std::optional<QuadratureSource> source = std::nullopt);
  static Distribution from_weights(const std::vector<double>& values, const std::vector<double>& weights);

  static Distribution bernoulli(double p);

  std::span<const double> values() const { return values_; }
  std::span<const double> log_weights() const { return log_weights_; }
  std::size_t size() const { return values_.size(); }
  double min_value() const { return values_.front(); }
  double max_value() const { return values_.back(); }
  DistributionKind kind() const { return kind_; }
  const std::optional<QuadratureSource>& source() const { return source_; }

  double mean() const;
  double variance() const;

 private:
  Distribution() = default;

  std::vector<double> values_;
  std::vector<double> log_weights_;
  DistributionKind kind_ = DistributionKind::ExactDiscrete;
  std::optional<QuadratureSource> source_;
};

inline constexpr double kBerryEsseenC1 = 0.33554;
inline constexpr double kBerryEsseenC2 = 0.415;
inline constexpr double kMinVariance = 1e-300;

struct TiltedMoments {
  double theta = 0.0;
  double k = 0.0;   // log moment generating function
  double k1 = 0.0;  // tilted mean
  double k2 = 0.0;  // tilted variance
  double c3 = 0.0;  // third central moment
  double c4 = 0.0;  // fourth central moment
  double t3_abs = 0.0;
  double xi = 0.0;
};

TiltedMoments tilted_moments(const Distribution& dist, double theta);

// Log moment generating function alone.
double log_mgf(const Distribution& dist, double theta);

Distribution tilt_distribution(const Distribution& dist, double theta);

inline constexpr std::size_t kDefaultQuadratureNodes = 2001;
inline constexpr double kQuadratureHalfWidth = 12.0;

// N(mean, variance) on a uniform grid of standard scores in [-12, 12].
Distribution gaussian_quadrature(double mean, double variance, std::size_t nodes = kDefaultQuadratureNodes);

// Chi-squared with one degree of freedom, built as the square of the
// Gaussian grid so the density singularity at zero never enters.
Distribution chi_squared_quadrature(std::size_t nodes = kDefaultQuadratureNodes);

double log_sum_exp(std::span<const double> xs);

}  // namespace certbound
