#include "certbound/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "certbound/error.hpp"
#include "summation.hpp"

namespace certbound {

double log_sum_exp(std::span<const double> xs) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : xs) top = std::max(top, x);
  if (!std::isfinite(top)) return top;
  NeumaierSum sum;
  for (double x : xs) sum.add(std::exp(x - top));
  return top + std::log(sum.value());
}

Distribution Distribution::from_log_weights(std::vector<double> values, std::vector<double> log_weights,
                                            DistributionKind kind, std::optional<QuadratureSource> source) {
  if (values.size() != log_weights.size()) {
    throw Error(ErrorCode::BadParams, "values and weights differ in length");
  }
  std::vector<std::size_t> order;
  order.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || std::isnan(log_weights[i]) || log_weights[i] == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::BadParams, fmt::format("support point {} is not finite", i));
    }
    if (log_weights[i] != -std::numeric_limits<double>::infinity()) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  Distribution d;
  d.kind_ = kind;
  d.source_ = std::move(source);
  for (std::size_t idx : order) {
    const double v = values[idx];
    const double lw = log_weights[idx];
    if (!d.values_.empty() && d.values_.back() == v) {
      double& acc = d.log_weights_.back();
      const double hi = std::max(acc, lw);
      acc = hi + std::log1p(std::exp(std::min(acc, lw) - hi));
    } else {
      d.values_.push_back(v);
      d.log_weights_.push_back(lw);
    }
  }
  if (d.values_.size() < 2) {
    throw Error(ErrorCode::DegenerateVariance, "distribution needs at least two distinct support points");
  }
  const double total = log_sum_exp(d.log_weights_);
  for (double& lw : d.log_weights_) lw -= total;
  return d;
}

Distribution Distribution::from_weights(const std::vector<double>& values, const std::vector<double>& weights) {
  std::vector<double> lw(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw Error(ErrorCode::BadParams, fmt::format("weight {} must be finite and non-negative", i));
    }
    lw[i] = std::log(weights[i]);
  }
  return from_log_weights(values, std::move(lw));
}

Distribution Distribution::bernoulli(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::BadParams, fmt::format("bernoulli p={} outside (0,1)", p));
  return from_log_weights({0.0, 1.0}, {std::log1p(-p), std::log(p)});
}

double Distribution::mean() const { return tilted_moments(*this, 0.0).k1; }

double Distribution::variance() const { return tilted_moments(*this, 0.0).k2; }

double log_mgf(const Distribution& dist, double theta) {
  const auto ys = dist.values();
  const auto lws = dist.log_weights();
  std::vector<double> e(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) e[i] = theta * ys[i] + lws[i];
  const double k = log_sum_exp(e);
  if (!std::isfinite(k)) throw Error(ErrorCode::TiltOverflow, fmt::format("K({}) is not finite", theta));
  return k;
}

TiltedMoments tilted_moments(const Distribution& dist, double theta) {
  if (!std::isfinite(theta)) throw Error(ErrorCode::TiltOverflow, "tilt must be finite");
  const auto ys = dist.values();
  const auto lws = dist.log_weights();
  const std::size_t n = ys.size();

  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = theta * ys[i] + lws[i];
  const double k = log_sum_exp(q);
  if (!std::isfinite(k)) throw Error(ErrorCode::TiltOverflow, fmt::format("K({}) is not finite", theta));

  NeumaierSum mass;
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = std::exp(q[i] - k);
    mass.add(q[i]);
  }
  const double inv_mass = 1.0 / mass.value();

  NeumaierSum s1;
  for (std::size_t i = 0; i < n; ++i) s1.add(q[i] * ys[i]);
  double k1 = s1.value() * inv_mass;
  NeumaierSum shift;
  for (std::size_t i = 0; i < n; ++i) shift.add(q[i] * (ys[i] - k1));
  k1 += shift.value() * inv_mass;

  NeumaierSum s2, s3, s4, sa;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = ys[i] - k1;
    const double d2 = d * d;
    s2.add(q[i] * d2);
    s3.add(q[i] * d2 * d);
    s4.add(q[i] * d2 * d2);
    sa.add(q[i] * d2 * std::abs(d));
  }

  TiltedMoments m;
  m.theta = theta;
  m.k = k;
  m.k1 = k1;
  m.k2 = s2.value() * inv_mass;
  m.c3 = s3.value() * inv_mass;
  m.c4 = s4.value() * inv_mass;
  m.t3_abs = sa.value() * inv_mass;
  if (!(m.k2 > kMinVariance)) {
    throw Error(ErrorCode::DegenerateVariance, fmt::format("tilted variance {} at theta={}", m.k2, theta));
  }
  m.xi = kBerryEsseenC1 * (m.t3_abs / std::pow(m.k2, 1.5) + kBerryEsseenC2);
  return m;
}

Distribution tilt_distribution(const Distribution& dist, double theta) {
  const double k = log_mgf(dist, theta);
  const auto ys = dist.values();
  const auto lws = dist.log_weights();
  std::vector<double> values(ys.begin(), ys.end());
  std::vector<double> lw(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) lw[i] = theta * ys[i] + lws[i] - k;
  return Distribution::from_log_weights(std::move(values), std::move(lw), dist.kind(), dist.source());
}

namespace {

// Symmetric standard-score grid on [-12, 12] with trapezoid log-weights
// against the standard normal density (unnormalized).
void standard_normal_grid(std::size_t nodes, std::vector<double>& z, std::vector<double>& lw) {
  if (nodes < 3) throw Error(ErrorCode::QuadratureBudget, fmt::format("need at least 3 nodes, got {}", nodes));
  if (nodes % 2 == 0) ++nodes;
  const double centre = static_cast<double>(nodes - 1) / 2.0;
  const double h = kQuadratureHalfWidth / centre;
  z.resize(nodes);
  lw.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    z[i] = (static_cast<double>(i) - centre) * h;
    lw[i] = -0.5 * z[i] * z[i];
  }
  lw.front() += std::log(0.5);
  lw.back() += std::log(0.5);
}

}  // namespace

Distribution gaussian_quadrature(double mean, double variance, std::size_t nodes) {
  if (!std::isfinite(mean) || !(variance > 0.0) || !std::isfinite(variance)) {
    throw Error(ErrorCode::BadParams, fmt::format("gaussian(mean={}, variance={})", mean, variance));
  }
  std::vector<double> z, lw;
  standard_normal_grid(nodes, z, lw);
  const double sd = std::sqrt(variance);
  for (double& v : z) v = mean + sd * v;
  QuadratureSource src{fmt::format("gaussian(mean={}, variance={})", mean, variance), z.size(), z.front(),
                       z.back()};
  return Distribution::from_log_weights(std::move(z), std::move(lw), DistributionKind::Quadrature, std::move(src));
}

Distribution chi_squared_quadrature(std::size_t nodes) {
  std::vector<double> z, lw;
  standard_normal_grid(nodes, z, lw);
  const std::size_t count = z.size();
  for (double& v : z) v = v * v;
  QuadratureSource src{"chi_squared(dof=1)", count, 0.0, kQuadratureHalfWidth * kQuadratureHalfWidth};
  return Distribution::from_log_weights(std::move(z), std::move(lw), DistributionKind::Quadrature, std::move(src));
}

}  // namespace certbound
