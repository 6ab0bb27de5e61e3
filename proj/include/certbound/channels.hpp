#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "certbound/distribution.hpp"

namespace certbound {

enum class ChannelKind { Bsc, BiAwgn, BiSas };

struct ChannelModel {
  ChannelKind kind = ChannelKind::Bsc;
  double delta = 0.11;     // BSC crossover
  double snr = 1.0;        // BI-AWGN, amplitude sqrt(snr) over unit-variance noise
  double alpha = 1.4;      // stable index
  double sigma = 0.6;      // stable scale
  double amplitude = 1.0;  // stable input amplitude

  static ChannelModel bsc(double delta);
  static ChannelModel bi_awgn(double snr);
  static ChannelModel bi_sas(double alpha, double sigma, double amplitude = 1.0);

  std::string describe() const;
};

// Per-letter information density under the joint law and under the product
// of the input and output marginals. Both share one support; for continuous
// outputs the channel is quantized onto the output grid and the density is
// that of the quantized channel, so d(ind)/d(joint) = exp(-value) holds exactly.
struct DensityBuild {
  Distribution joint;
  Distribution independent;
  std::size_t nodes = 0;
  double y_lower = 0.0;
  double y_upper = 0.0;
  std::string output_law;
  ChannelModel channel;
};

// input_sign selects the conditioning input +a or -a; the two builds agree.
DensityBuild build_density_dist(const ChannelModel& channel, std::size_t nodes = kDefaultQuadratureNodes,
                                int input_sign = 1);

// Output grid with trapezoid log-weights for integrals over y.
struct OutputGrid {
  std::vector<double> y;
  std::vector<double> log_w;
};

OutputGrid output_grid(const ChannelModel& channel, std::size_t nodes = kDefaultQuadratureNodes);

// ln of the noise density at z.
double log_noise_density(const ChannelModel& channel, double z);

inline constexpr std::size_t kMinChannelNodes = 101;
inline constexpr std::size_t kMaxChannelNodes = 1'000'001;
inline constexpr double kStableTruncation = 1e-12;

}  // namespace certbound
