#include "certbound/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "certbound/error.hpp"
#include "certbound/stable.hpp"

namespace certbound {

ChannelModel ChannelModel::bsc(double delta) {
  ChannelModel ch;
  ch.kind = ChannelKind::Bsc;
  ch.delta = delta;
  return ch;
}

ChannelModel ChannelModel::bi_awgn(double snr) {
  ChannelModel ch;
  ch.kind = ChannelKind::BiAwgn;
  ch.snr = snr;
  return ch;
}

ChannelModel ChannelModel::bi_sas(double alpha, double sigma, double amplitude) {
  ChannelModel ch;
  ch.kind = ChannelKind::BiSas;
  ch.alpha = alpha;
  ch.sigma = sigma;
  ch.amplitude = amplitude;
  return ch;
}

std::string ChannelModel::describe() const {
  switch (kind) {
    case ChannelKind::Bsc: return fmt::format("bsc(delta={})", delta);
    case ChannelKind::BiAwgn: return fmt::format("bi_awgn(snr={}, noise_variance=1)", snr);
    case ChannelKind::BiSas: return fmt::format("bi_sas(alpha={}, sigma={}, amplitude={})", alpha, sigma, amplitude);
  }
  return "unknown";
}

namespace {

void validate(const ChannelModel& ch) {
  switch (ch.kind) {
    case ChannelKind::Bsc:
      if (!(ch.delta > 0.0 && ch.delta <= 0.5)) throw Error(ErrorCode::BadChannel, ch.describe());
      return;
    case ChannelKind::BiAwgn:
      if (!(ch.snr > 0.0) || !std::isfinite(ch.snr)) throw Error(ErrorCode::BadChannel, ch.describe());
      return;
    case ChannelKind::BiSas:
      if (!(ch.alpha > 0.0 && ch.alpha <= 2.0) || !(ch.sigma > 0.0) || !std::isfinite(ch.sigma) ||
          !(ch.amplitude > 0.0) || !std::isfinite(ch.amplitude)) {
        throw Error(ErrorCode::BadChannel, ch.describe());
      }
      return;
  }
}

double input_amplitude(const ChannelModel& ch) {
  return ch.kind == ChannelKind::BiAwgn ? std::sqrt(ch.snr) : ch.amplitude;
}

// Noise offset beyond which the stable density falls below 1e-12 f(0).
double stable_truncation(const ChannelModel& ch) {
  const double cutoff = std::log(kStableTruncation) + log_noise_density(ch, 0.0);
  double lo = ch.sigma;
  double hi = 2.0 * ch.sigma;
  while (log_noise_density(ch, hi) > cutoff) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12 * ch.sigma) throw Error(ErrorCode::QuadratureBudget, "stable tail truncation too wide");
  }
  for (int i = 0; i < 40; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (log_noise_density(ch, mid) > cutoff) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

void check_nodes(std::size_t nodes) {
  if (nodes < kMinChannelNodes || nodes > kMaxChannelNodes) {
    throw Error(ErrorCode::QuadratureBudget,
                fmt::format("node count {} outside [{}, {}]", nodes, kMinChannelNodes, kMaxChannelNodes));
  }
}

double log_add(double a, double b) {
  const double hi = std::max(a, b);
  if (hi == -INFINITY) return hi;
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

double log_noise_density(const ChannelModel& ch, double z) {
  switch (ch.kind) {
    case ChannelKind::BiAwgn: return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
    case ChannelKind::BiSas: return std::log(sas_density(ch.alpha, ch.sigma, z));
    case ChannelKind::Bsc: break;
  }
  throw Error(ErrorCode::BadChannel, "the BSC has no noise density");
}

OutputGrid output_grid(const ChannelModel& ch, std::size_t nodes) {
  validate(ch);
  check_nodes(nodes);
  if (nodes % 2 == 0) ++nodes;
  const double a = input_amplitude(ch);
  const double centre = static_cast<double>(nodes - 1) / 2.0;
  OutputGrid grid;
  grid.y.resize(nodes);
  grid.log_w.resize(nodes);
  if (ch.kind == ChannelKind::BiAwgn) {
    const double h = (a + kQuadratureHalfWidth) / centre;
    for (std::size_t i = 0; i < nodes; ++i) {
      grid.y[i] = (static_cast<double>(i) - centre) * h;
      grid.log_w[i] = std::log(h);
    }
  } else if (ch.kind == ChannelKind::BiSas) {
    // y = sigma sinh(u) on a uniform u-grid: uniform near the inputs,
    // geometrically stretched through the polynomial tails.
    const double y_max = a + stable_truncation(ch);
    const double h = std::asinh(y_max / ch.sigma) / centre;
    for (std::size_t i = 0; i < nodes; ++i) {
      const double u = (static_cast<double>(i) - centre) * h;
      grid.y[i] = ch.sigma * std::sinh(u);
      grid.log_w[i] = std::log(h * ch.sigma * std::cosh(u));
    }
  } else {
    throw Error(ErrorCode::BadChannel, "the BSC has no output grid");
  }
  grid.log_w.front() += std::log(0.5);
  grid.log_w.back() += std::log(0.5);
  return grid;
}

DensityBuild build_density_dist(const ChannelModel& ch, std::size_t nodes, int input_sign) {
  validate(ch);
  if (input_sign != 1 && input_sign != -1) throw Error(ErrorCode::BadParams, "input sign must be +1 or -1");
  if (ch.kind == ChannelKind::Bsc) {
    const double d = ch.delta;
    const std::vector<double> values = {std::log(2.0 * (1.0 - d)), std::log(2.0 * d)};
    return DensityBuild{Distribution::from_log_weights(values, {std::log1p(-d), std::log(d)}),
                        Distribution::from_log_weights(values, {std::log(0.5), std::log(0.5)}),
                        2,
                        0.0,
                        1.0,
                        "uniform{0,1}",
                        ch};
  }

  const OutputGrid grid = output_grid(ch, nodes);
  const double a = input_amplitude(ch) * input_sign;
  const std::size_t m = grid.y.size();
  std::vector<double> lp(m), lm(m);
  for (std::size_t j = 0; j < m; ++j) {
    lp[j] = grid.log_w[j] + log_noise_density(ch, grid.y[j] - a);
    lm[j] = grid.log_w[j] + log_noise_density(ch, grid.y[j] + a);
  }
  const double zp = log_sum_exp(lp);
  const double zm = log_sum_exp(lm);
  std::vector<double> iota(m), lq(m);
  for (std::size_t j = 0; j < m; ++j) {
    lp[j] -= zp;
    lm[j] -= zm;
    lq[j] = log_add(lp[j], lm[j]) - std::log(2.0);
    iota[j] = lp[j] - lq[j];
  }
  QuadratureSource src{fmt::format("information density of {}", ch.describe()), m, grid.y.front(), grid.y.back()};
  Distribution joint = Distribution::from_log_weights(iota, lp, DistributionKind::Quadrature, src);
  Distribution independent =
      Distribution::from_log_weights(std::move(iota), std::move(lq), DistributionKind::Quadrature, src);
  return DensityBuild{std::move(joint), std::move(independent), m, grid.y.front(), grid.y.back(), "channel_marginal",
                      ch};
}

}  // namespace certbound
