#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "certbound/channels.hpp"
#include "certbound/distribution.hpp"

namespace certbound {

// Number of codewords M = 2^{log2_m}, kept as a real number so that M - 1
// never overflows. ceil() is not applied; the curves use M = 2^{nR} directly.
struct CodeSize {
  double log2_m = 1.0;

  static CodeSize from_rate(std::size_t n, double rate_bits) { return {static_cast<double>(n) * rate_bits}; }

  double ln_m() const;
  // ln((M - 1) / 2)
  double dt_threshold() const;
};

enum class FblFlavor { Dt, Mc };

enum FblFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagLowSignal = 1u << 0,     // a max{0, .} in G clipped a negative component
  kFlagDegenerate = 1u << 1,    // gamma >= M, the converse is vacuous
  kFlagUpperClipped = 1u << 2,  // S hit its cap of 1
  kFlagGridGamma = 1u << 3,     // gamma from the 512-point grid, not golden section
  kFlagOutOfHull = 1u << 4,
  kFlagNegativeLower = 1u << 5,  // meta-converse lower bound below zero (stored unclamped)
};

std::string flags_to_string(std::uint32_t flags);

struct NormalTriple {
  double d = 0.0;
  double alpha = 0.0;
  double n_upper = 0.0;
};

struct SaddlepointTriple {
  double g = 0.0;
  double beta = 0.0;
  double s = 0.0;
  // Components. The second-term values are already multiplied by the
  // threshold factor ((M - 1)/2 or gamma).
  double beta1 = 0.0;
  double scaled_beta2 = 0.0;
  double g1 = 0.0;
  double scaled_g2 = 0.0;
  double radius = 0.0;  // (2 xi / sqrt(n)) exp(n K - theta t), the per-term error
};

struct FblPoint {
  FblFlavor flavor = FblFlavor::Dt;
  std::size_t n = 0;
  double rate = 0.0;  // bits per channel use
  double log2_m = 0.0;
  double log_gamma = 0.0;  // threshold in nats; ln((M - 1)/2) for the dependence-testing stack
  double theta = 0.0;
  NormalTriple normal;
  SaddlepointTriple sp;
  std::optional<double> exact;
  std::uint32_t flags = kFlagNone;
};

// Dependence-testing (achievability) stack.
TiltedMoments dt_tilted_stats(const DensityBuild& density, double theta);
double dt_solve_theta(const DensityBuild& density, std::size_t n, CodeSize m);
double dt_beta1(const DensityBuild& density, std::size_t n, CodeSize m, double theta);
double dt_beta2(const DensityBuild& density, std::size_t n, CodeSize m, double theta);
NormalTriple dt_normal(const DensityBuild& density, std::size_t n, CodeSize m);
FblPoint dt_bounds(const DensityBuild& density, std::size_t n, CodeSize m);
double bsc_exact_t(double delta, std::size_t n, CodeSize m);

// Meta-converse stack with auxiliary output law equal to the channel output
// marginal, threshold ln(gamma).
TiltedMoments mc_tilted_stats(const DensityBuild& density, double theta);
double mc_solve_theta(const DensityBuild& density, std::size_t n, double log_gamma);
double mc_beta1(const DensityBuild& density, std::size_t n, double log_gamma, double theta);
double mc_beta2(const DensityBuild& density, std::size_t n, double log_gamma, double theta);
NormalTriple mc_normal(const DensityBuild& density, std::size_t n, CodeSize m, double log_gamma);
FblPoint mc_bounds(const DensityBuild& density, std::size_t n, CodeSize m, double log_gamma);
double bsc_exact_c(double delta, std::size_t n, CodeSize m, double log_gamma);

inline constexpr std::size_t kGammaGridPoints = 512;
inline constexpr double kGammaTolerance = 1e-6;

struct GammaSearch {
  double log_gamma = 0.0;
  double objective = 0.0;
  bool grid_fallback = false;
  FblPoint point;
};

// Maximizes over ln(gamma) in [n mu - 6 sqrt(n V), n mu + 6 sqrt(n V)]: the
// exact converse for the BSC, otherwise the certified lower bound.
GammaSearch mc_optimize_gamma(const DensityBuild& density, std::size_t n, CodeSize m);

// The objective maximized by mc_optimize_gamma.
double mc_gamma_objective(const DensityBuild& density, std::size_t n, CodeSize m, double log_gamma);

}  // namespace certbound
