#include "certbound/fbl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "certbound/error.hpp"
#include "certbound/gaussian.hpp"
#include "certbound/oracle.hpp"
#include "certbound/saddlepoint.hpp"

namespace certbound {

double CodeSize::ln_m() const { return log2_m * std::numbers::ln2; }

double CodeSize::dt_threshold() const {
  const double ln_m_value = ln_m();
  if (!(ln_m_value > 0.0) || !std::isfinite(ln_m_value)) {
    throw Error(ErrorCode::BadParams, fmt::format("need M > 1, got log2(M)={}", log2_m));
  }
  return ln_m_value + std::log1p(-std::exp(-ln_m_value)) - std::numbers::ln2;
}

std::string flags_to_string(std::uint32_t flags) {
  static constexpr std::pair<std::uint32_t, const char*> kNames[] = {
      {kFlagLowSignal, "low_signal"},       {kFlagDegenerate, "degenerate"}, {kFlagUpperClipped, "upper_clipped"},
      {kFlagGridGamma, "gamma_grid"},       {kFlagOutOfHull, "out_of_hull"}, {kFlagNegativeLower, "negative_lower"},
  };
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if ((flags & bit) == 0) continue;
    if (!out.empty()) out += ';';
    out += name;
  }
  return out;
}

namespace {

void require_n(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::BadParams, "n must be positive");
}

struct BetaTerms {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double scaled_beta2 = 0.0;  // e^t beta2
};

BetaTerms beta_terms(const TiltedMoments& m, std::size_t n, double t) {
  const double nd = static_cast<double>(n);
  const double nk = nd * m.k;
  const double nv = nd * m.k2;
  const double root_nv = std::sqrt(nv);
  const double th = m.theta;
  const double tp = th + 1.0;

  BetaTerms b;
  const double lb1 = log_exp_times_q(nk - th * t + 0.5 * th * th * nv, std::abs(th) * root_nv);
  b.beta1 = th > 0.0 ? 1.0 - std::exp(lb1) : std::exp(lb1);
  const double lb2 = log_exp_times_q(nk - tp * t + 0.5 * tp * tp * nv, std::abs(tp) * root_nv);
  if (th <= -1.0) {
    b.beta2 = -std::expm1(lb2);
    b.scaled_beta2 = std::exp(t) * b.beta2;
  } else {
    b.beta2 = std::exp(lb2);
    b.scaled_beta2 = std::exp(t + lb2);
  }
  return b;
}

SaddlepointTriple saddlepoint_triple(const TiltedMoments& m, std::size_t n, double t, double penalty,
                                     std::uint32_t& flags) {
  const double nd = static_cast<double>(n);
  const BetaTerms b = beta_terms(m, n, t);
  SaddlepointTriple sp;
  sp.beta1 = b.beta1;
  sp.scaled_beta2 = b.scaled_beta2;
  sp.radius = std::exp(std::log(2.0 * m.xi / std::sqrt(nd)) + nd * m.k - m.theta * t);
  sp.g1 = b.beta1 - sp.radius;
  sp.scaled_g2 = b.scaled_beta2 - sp.radius;
  if (sp.g1 < 0.0 || sp.scaled_g2 < 0.0) flags |= kFlagLowSignal;
  sp.g = std::max(0.0, sp.g1) + std::max(0.0, sp.scaled_g2) - penalty;
  sp.beta = b.beta1 + b.scaled_beta2 - penalty;
  const double upper = sp.beta + 2.0 * sp.radius;
  if (upper > 1.0) flags |= kFlagUpperClipped;
  sp.s = std::min(1.0, upper);
  return sp;
}

NormalTriple normal_triple(const DensityBuild& density, std::size_t n, double t, double penalty) {
  require_n(n);
  const TiltedMoments m = tilted_moments(density.joint, 0.0);
  const double nd = static_cast<double>(n);
  const double root_n = std::sqrt(nd);
  NormalTriple out;
  out.alpha = gaussian_q((nd * m.k1 - t) / std::sqrt(nd * m.k2)) - penalty;
  out.d = std::max(0.0, out.alpha - m.xi / root_n);
  out.n_upper = std::min(1.0, out.alpha + 5.0 * m.xi / root_n +
                                  2.0 * std::numbers::ln2 / (std::sqrt(m.k2) * std::sqrt(2.0 * nd * std::numbers::pi)));
  return out;
}

std::optional<double> bsc_delta(const DensityBuild& density) {
  if (density.channel.kind == ChannelKind::Bsc) return density.channel.delta;
  return std::nullopt;
}

// Smallest flip count k with i_n(k) <= t, or n + 1 if none; i_n(k) = (n-k) ln(2(1-delta)) + k ln(2 delta).
long long flip_threshold(double delta, std::size_t n, double t) {
  const double l1 = std::log(2.0 * (1.0 - delta));
  const double l0 = std::log(2.0 * delta);
  const long long nn = static_cast<long long>(n);
  auto iota = [&](long long k) { return static_cast<double>(nn - k) * l1 + static_cast<double>(k) * l0; };
  if (l1 == l0) return iota(0) <= t ? 0 : nn + 1;
  const double k_real = (static_cast<double>(n) * l1 - t) / (l1 - l0);
  long long k = static_cast<long long>(std::clamp(std::ceil(k_real), 0.0, static_cast<double>(nn + 1)));
  while (k > 0 && iota(k - 1) <= t) --k;
  while (k <= nn && iota(k) > t) ++k;
  return k;
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::BadParams, fmt::format("delta={}", delta));
}

// P_joint[i_n <= t] + e^t P_ind[i_n > t].
double bsc_two_terms(double delta, std::size_t n, double t) {
  const long long k0 = flip_threshold(delta, n, t);
  const double joint = std::exp(log_binomial_sf(n, delta, k0));
  const double ind = std::exp(t + log_binomial_cdf(n, 0.5, k0 - 1));
  return joint + ind;
}

}  // namespace

TiltedMoments dt_tilted_stats(const DensityBuild& density, double theta) { return tilted_moments(density.joint, theta); }

double dt_solve_theta(const DensityBuild& density, std::size_t n, CodeSize m) {
  return solve_theta_star(density.joint, n, m.dt_threshold()).theta_star;
}

double dt_beta1(const DensityBuild& density, std::size_t n, CodeSize m, double theta) {
  require_n(n);
  return beta_terms(tilted_moments(density.joint, theta), n, m.dt_threshold()).beta1;
}

double dt_beta2(const DensityBuild& density, std::size_t n, CodeSize m, double theta) {
  require_n(n);
  return beta_terms(tilted_moments(density.joint, theta), n, m.dt_threshold()).beta2;
}

NormalTriple dt_normal(const DensityBuild& density, std::size_t n, CodeSize m) {
  return normal_triple(density, n, m.dt_threshold(), 0.0);
}

FblPoint dt_bounds(const DensityBuild& density, std::size_t n, CodeSize m) {
  require_n(n);
  const double t = m.dt_threshold();
  FblPoint p;
  p.flavor = FblFlavor::Dt;
  p.n = n;
  p.log2_m = m.log2_m;
  p.rate = m.log2_m / static_cast<double>(n);
  p.log_gamma = t;
  const SaddlepointSolve sol = solve_theta_star(density.joint, n, t);
  p.theta = sol.theta_star;
  p.sp = saddlepoint_triple(sol.moments, n, t, 0.0, p.flags);
  p.sp.g = std::min(1.0, p.sp.g);
  p.sp.beta = std::clamp(p.sp.beta, 0.0, 1.0);
  p.normal = dt_normal(density, n, m);
  if (auto delta = bsc_delta(density)) p.exact = bsc_exact_t(*delta, n, m);
  return p;
}

double bsc_exact_t(double delta, std::size_t n, CodeSize m) {
  check_delta(delta);
  require_n(n);
  return bsc_two_terms(delta, n, m.dt_threshold());
}

TiltedMoments mc_tilted_stats(const DensityBuild& density, double theta) { return dt_tilted_stats(density, theta); }

double mc_solve_theta(const DensityBuild& density, std::size_t n, double log_gamma) {
  return solve_theta_star(density.joint, n, log_gamma).theta_star;
}

double mc_beta1(const DensityBuild& density, std::size_t n, double log_gamma, double theta) {
  require_n(n);
  return beta_terms(tilted_moments(density.joint, theta), n, log_gamma).beta1;
}

double mc_beta2(const DensityBuild& density, std::size_t n, double log_gamma, double theta) {
  require_n(n);
  return beta_terms(tilted_moments(density.joint, theta), n, log_gamma).beta2;
}

NormalTriple mc_normal(const DensityBuild& density, std::size_t n, CodeSize m, double log_gamma) {
  return normal_triple(density, n, log_gamma, std::exp(log_gamma - m.ln_m()));
}

FblPoint mc_bounds(const DensityBuild& density, std::size_t n, CodeSize m, double log_gamma) {
  require_n(n);
  if (!std::isfinite(log_gamma)) throw Error(ErrorCode::BadParams, "ln(gamma) must be finite");
  FblPoint p;
  p.flavor = FblFlavor::Mc;
  p.n = n;
  p.log2_m = m.log2_m;
  p.rate = m.log2_m / static_cast<double>(n);
  p.log_gamma = log_gamma;
  const double penalty = std::exp(log_gamma - m.ln_m());
  if (log_gamma >= m.ln_m()) p.flags |= kFlagDegenerate;
  const SaddlepointSolve sol = solve_theta_star(density.joint, n, log_gamma);
  p.theta = sol.theta_star;
  p.sp = saddlepoint_triple(sol.moments, n, log_gamma, penalty, p.flags);
  if (p.sp.g < 0.0) p.flags |= kFlagNegativeLower;
  p.normal = mc_normal(density, n, m, log_gamma);
  if (auto delta = bsc_delta(density)) p.exact = bsc_exact_c(*delta, n, m, log_gamma);
  return p;
}

double bsc_exact_c(double delta, std::size_t n, CodeSize m, double log_gamma) {
  check_delta(delta);
  require_n(n);
  return bsc_two_terms(delta, n, log_gamma) - std::exp(log_gamma - m.ln_m());
}

double mc_gamma_objective(const DensityBuild& density, std::size_t n, CodeSize m, double log_gamma) {
  if (auto delta = bsc_delta(density)) return bsc_exact_c(*delta, n, m, log_gamma);
  try {
    return mc_bounds(density, n, m, log_gamma).sp.g;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutOfHull) return -std::numeric_limits<double>::infinity();
    throw;
  }
}

GammaSearch mc_optimize_gamma(const DensityBuild& density, std::size_t n, CodeSize m) {
  require_n(n);
  const TiltedMoments m0 = tilted_moments(density.joint, 0.0);
  const double nd = static_cast<double>(n);
  const double spread = 6.0 * std::sqrt(nd * m0.k2);
  const double lo = nd * m0.k1 - spread;
  const double hi = nd * m0.k1 + spread;
  auto objective = [&](double x) { return mc_gamma_objective(density, n, m, x); };

  std::vector<double> xs(kGammaGridPoints), fs(kGammaGridPoints);
  std::size_t best = 0;
  for (std::size_t i = 0; i < kGammaGridPoints; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kGammaGridPoints - 1);
    fs[i] = objective(xs[i]);
    if (fs[i] > fs[best]) best = i;
  }
  if (!std::isfinite(fs[best])) throw Error(ErrorCode::NoBracket, "objective undefined on the gamma bracket");

  double scale = 0.0;
  for (double f : fs) {
    if (std::isfinite(f)) scale = std::max(scale, std::abs(f));
  }
  const double slack = 1e-12 * scale;
  bool unimodal = true;
  for (std::size_t i = 1; i <= best; ++i) unimodal = unimodal && fs[i] >= fs[i - 1] - slack;
  for (std::size_t i = best + 1; i < kGammaGridPoints; ++i) unimodal = unimodal && fs[i] <= fs[i - 1] + slack;

  GammaSearch out;
  out.log_gamma = xs[best];
  out.objective = fs[best];
  if (unimodal) {
    double a = xs[best == 0 ? 0 : best - 1];
    double b = xs[std::min(best + 1, kGammaGridPoints - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    while (b - a > kGammaTolerance) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = objective(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = objective(d);
      }
    }
    const double x = 0.5 * (a + b);
    const double fx = objective(x);
    if (fx > out.objective) {
      out.log_gamma = x;
      out.objective = fx;
    }
  } else {
    out.grid_fallback = true;
  }
  out.point = mc_bounds(density, n, m, out.log_gamma);
  if (out.grid_fallback) out.point.flags |= kFlagGridGamma;
  return out;
}

}  // namespace certbound
