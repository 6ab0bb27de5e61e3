// Acceptance suite: one line per criterion, exit status 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "certbound/channels.hpp"
#include "certbound/cli.hpp"
#include "certbound/fbl.hpp"
#include "certbound/gaussian.hpp"
#include "certbound/oracle.hpp"
#include "certbound/saddlepoint.hpp"
#include "certbound/stable.hpp"

using namespace certbound;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Tally {
 public:
  void check(bool ok, const std::string& what) {
    ++total_;
    if (!ok) {
      ++failed_;
      if (first_failure_.empty()) first_failure_ = what;
    }
  }
  int total() const { return total_; }
  int failed() const { return failed_; }
  Outcome outcome(const std::string& extra = "") const {
    std::string detail = fmt::format("{}/{} checks", total_ - failed_, total_);
    if (!extra.empty()) detail += ", " + extra;
    if (failed_) detail += "; first failure: " + first_failure_;
    return {failed_ == 0, detail};
  }

 private:
  int total_ = 0;
  int failed_ = 0;
  std::string first_failure_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_runtime(Tally& t, double elapsed, double limit) {
  t.check(elapsed < limit, fmt::format("runtime {:.3f} s exceeds {} s", elapsed, limit));
}

Outcome envelope_containment(const Distribution& dist, std::size_t n, const std::vector<double>& grid,
                             const std::function<double(double)>& exact, double limit) {
  const auto start = std::chrono::steady_clock::now();
  Tally t;
  for (double a : grid) {
    const double f = exact(a);
    const BoundEnvelope sp = thm3_envelope(dist, n, a);
    const BoundEnvelope be = berry_esseen_envelope(dist, n, a);
    t.check(sp.lower <= f && f <= sp.upper, fmt::format("a={} saddlepoint [{}, {}] vs {}", a, sp.lower, sp.upper, f));
    t.check(be.lower <= f && f <= be.upper, fmt::format("a={} Berry-Esseen [{}, {}] vs {}", a, be.lower, be.upper, f));
  }
  const double elapsed = seconds_since(start);
  check_runtime(t, elapsed, limit);
  return t.outcome(fmt::format("{:.3f} s", elapsed));
}

Outcome criterion1() {
  std::vector<double> grid;
  for (int a = 5; a <= 35; ++a) grid.push_back(a);
  return envelope_containment(Distribution::bernoulli(0.2), 100, grid,
                              [](double a) { return exact_cdf(BinomialLaw{100, 0.2}, a); }, 1.0);
}

Outcome criterion2() {
  const auto start = std::chrono::steady_clock::now();
  const Distribution chi = chi_squared_quadrature(2001);
  std::vector<double> grid;
  for (int a = 2; a <= 100; a += 2) grid.push_back(a);
  Outcome o = envelope_containment(chi, 50, grid, [](double a) { return exact_cdf(GammaLaw{25.0, 2.0}, a); }, 10.0);
  const double elapsed = seconds_since(start);
  if (elapsed >= 10.0) o = {false, o.detail + fmt::format("; total runtime {:.3f} s", elapsed)};
  return o;
}

Outcome criterion3() {
  const Distribution g = gaussian_quadrature(0.0, 1.0);
  std::mt19937_64 gen(20240601);
  std::uniform_int_distribution<int> pick_n(1, 50);
  std::uniform_real_distribution<double> pick_z(-5.0, 5.0);
  Tally t;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto n = static_cast<std::size_t>(pick_n(gen));
    const double root_n = std::sqrt(static_cast<double>(n));
    const double a = pick_z(gen) * root_n;
    const double err = std::abs(saddlepoint_cdf(g, n, a) - gaussian_cdf(a / root_n));
    worst = std::max(worst, err);
    t.check(err <= 1e-8, fmt::format("n={} a={} error {}", n, a, err));
  }
  return t.outcome(fmt::format("max error {:.3g}", worst));
}

Outcome criterion4() {
  Tally t;
  const Distribution bern = Distribution::bernoulli(0.2);
  const Distribution chi = chi_squared_quadrature(2001);
  struct Case {
    const Distribution* dist;
    std::size_t n;
    const char* name;
  };
  for (const Case& c : {Case{&bern, 100, "bernoulli"}, Case{&chi, 50, "chi-squared"}}) {
    const double a = static_cast<double>(c.n) * c.dist->mean();
    const double sp = thm3_envelope(*c.dist, c.n, a).radius;
    const double be = berry_esseen_envelope(*c.dist, c.n, a).radius;
    t.check(std::abs(sp - 2.0 * be) <= 1e-12, fmt::format("{}: {} vs 2 x {}", c.name, sp, be));
  }
  const double sp30 = thm3_envelope(bern, 100, 30.0).radius;
  const double be30 = berry_esseen_envelope(bern, 100, 30.0).radius;
  t.check(sp30 < be30, fmt::format("a=30: {} not below {}", sp30, be30));
  return t.outcome(fmt::format("a=30 radii {:.4g} < {:.4g}", sp30, be30));
}

Outcome criterion5() {
  Tally t;
  const Distribution bern = Distribution::bernoulli(0.2);
  const Distribution chi = chi_squared_quadrature(2001);
  struct Case {
    const Distribution* dist;
    std::size_t n;
    double lo, hi, step;
    const char* name;
  };
  for (const Case& c : {Case{&bern, 100, 5.0, 35.0, 1.0, "bernoulli"}, Case{&chi, 50, 2.0, 100.0, 2.0, "chi-squared"}}) {
    std::vector<double> hs;
    for (double a = c.lo; a <= c.hi + 1e-9; a += c.step) {
      const SaddlepointSolve s = solve_theta_star(*c.dist, c.n, a);
      t.check(std::abs(s.residual) <= 1e-9 * std::max(1.0, std::abs(a)),
              fmt::format("{} a={} residual {}", c.name, a, s.residual));
      const double h = exponent_h(*c.dist, c.n, a);
      t.check(h <= 0.0, fmt::format("{} a={} h={}", c.name, a, h));
      hs.push_back(h);
    }
    for (std::size_t i = 1; i + 1 < hs.size(); ++i) {
      const double d2 = hs[i + 1] - 2.0 * hs[i] + hs[i - 1];
      t.check(d2 <= 1e-8, fmt::format("{} second difference {} at index {}", c.name, d2, i));
    }
    const double h_mean = exponent_h(*c.dist, c.n, static_cast<double>(c.n) * c.dist->mean());
    t.check(std::abs(h_mean) <= 1e-10, fmt::format("{} h at the mean {}", c.name, h_mean));
  }
  return t.outcome();
}

Outcome criterion6() {
  const auto start = std::chrono::steady_clock::now();
  Tally t;
  const DensityBuild d = build_density_dist(ChannelModel::bsc(0.11));
  for (std::size_t n = 100; n <= 2000; n += 100) {
    const FblPoint p = dt_bounds(d, n, CodeSize::from_rate(n, 0.32));
    const double ex = bsc_exact_t(0.11, n, CodeSize::from_rate(n, 0.32));
    t.check(p.sp.g <= ex && ex <= p.sp.s, fmt::format("n={} G={} T={} S={}", n, p.sp.g, ex, p.sp.s));
    t.check(p.normal.d <= ex && ex <= p.normal.n_upper,
            fmt::format("n={} D={} T={} N={}", n, p.normal.d, ex, p.normal.n_upper));
    if (n >= 200) {
      t.check(p.sp.s - p.sp.g < p.normal.n_upper - p.normal.d, fmt::format("n={} saddlepoint gap not tighter", n));
    }
  }
  const double elapsed = seconds_since(start);
  check_runtime(t, elapsed, 5.0);
  return t.outcome(fmt::format("{:.3f} s", elapsed));
}

Outcome criterion7() {
  const auto start = std::chrono::steady_clock::now();
  Tally t;
  const DensityBuild d = build_density_dist(ChannelModel::bsc(0.11));
  int fallbacks = 0;
  for (std::size_t n = 100; n <= 2000; n += 100) {
    const CodeSize m = CodeSize::from_rate(n, 0.42);
    const GammaSearch g = mc_optimize_gamma(d, n, m);
    fallbacks += g.grid_fallback ? 1 : 0;
    const FblPoint& p = g.point;
    const double ex = bsc_exact_c(0.11, n, m, g.log_gamma);
    t.check(p.sp.g <= ex && ex <= p.sp.s, fmt::format("n={} G={} C={} S={}", n, p.sp.g, ex, p.sp.s));
    t.check(p.normal.d <= ex && ex <= p.normal.n_upper,
            fmt::format("n={} D={} C={} N={}", n, p.normal.d, ex, p.normal.n_upper));
  }
  const double elapsed = seconds_since(start);
  check_runtime(t, elapsed, 30.0);
  return t.outcome(fmt::format("{:.3f} s, {} grid fallbacks", elapsed, fallbacks));
}

Outcome criterion8() {
  Tally t;
  double worst = 0.0;
  for (const ChannelModel& ch : {ChannelModel::bsc(0.11), ChannelModel::bi_awgn(1.0)}) {
    const DensityBuild d = build_density_dist(ch);
    for (double s : {-1.5, -1.0, -0.5, 0.0, 0.5, 1.0}) {
      const TiltedMoments joint = tilted_moments(d.joint, s);
      const TiltedMoments ind = tilted_moments(d.independent, s + 1.0);
      const double diffs[] = {std::abs(joint.k - ind.k), std::abs(joint.k1 - ind.k1), std::abs(joint.k2 - ind.k2),
                              std::abs(joint.xi - ind.xi)};
      const char* names[] = {"ln phi", "mu", "V", "xi"};
      for (int q = 0; q < 4; ++q) {
        worst = std::max(worst, diffs[q]);
        t.check(diffs[q] <= 1e-9, fmt::format("{} t={} {} differs by {}", ch.describe(), s, names[q], diffs[q]));
      }
    }
  }
  return t.outcome(fmt::format("max difference {:.3g}", worst));
}

Outcome criterion9() {
  Tally t;
  const Distribution dists[] = {
      Distribution::from_weights({0.0, 1.0}, {0.7, 0.3}),
      Distribution::from_weights({-1.0, 0.5, 2.0}, {0.2, 0.5, 0.3}),
      Distribution::from_weights({0.0, 1.0, 3.0, 4.5}, {0.1, 0.4, 0.3, 0.2}),
  };
  double worst = 0.0;
  for (const Distribution& d : dists) {
    for (std::size_t n = 1; n <= 6; ++n) {
      for (double theta : {-1.0, 0.7}) {
        const Distribution lhs = tilt_distribution(convolve_sum(d, n), theta);
        const Distribution rhs = convolve_sum(tilt_distribution(d, theta), n);
        if (lhs.size() != rhs.size()) {
          t.check(false, fmt::format("n={} support sizes {} and {}", n, lhs.size(), rhs.size()));
          continue;
        }
        for (std::size_t i = 0; i < lhs.size(); ++i) {
          const double diff = std::abs(std::exp(lhs.log_weights()[i]) - std::exp(rhs.log_weights()[i]));
          worst = std::max(worst, diff);
          t.check(lhs.values()[i] == rhs.values()[i] && diff <= 1e-12,
                  fmt::format("n={} theta={} point {} differs by {}", n, theta, lhs.values()[i], diff));
        }
      }
    }
  }
  return t.outcome(fmt::format("max difference {:.3g}", worst));
}

Outcome criterion10() {
  const auto start = std::chrono::steady_clock::now();
  constexpr std::size_t kSamples = 1'000'000;
  constexpr std::uint64_t kSeed = 20240601;
  struct Setup {
    ChannelModel channel;
    double rate;
  };
  int checks = 0;
  int passed = 0;
  std::string misses;
  for (const Setup& s : {Setup{ChannelModel::bi_awgn(1.0), 0.425}, Setup{ChannelModel::bi_sas(1.4, 0.6), 0.38}}) {
    const DensityBuild d = build_density_dist(s.channel);
    for (std::size_t n : {200u, 500u, 1000u}) {
      const CodeSize m = CodeSize::from_rate(n, s.rate);
      const FblPoint p = dt_bounds(d, n, m);
      const McFblTerms mc = mc_fbl_terms(d.joint, n, m.dt_threshold(), kSamples, kSeed + n);
      struct Term {
        const char* name;
        const McEstimate* est;
        double lo, hi;
      };
      const Term terms[] = {
          {"joint", &mc.joint_cdf, std::max(0.0, p.sp.g1), p.sp.beta1 + p.sp.radius},
          {"product", &mc.scaled_ind_sf, std::max(0.0, p.sp.scaled_g2), p.sp.scaled_beta2 + p.sp.radius},
          {"sum", &mc.sum, p.sp.g, p.sp.s},
      };
      for (const Term& term : terms) {
        ++checks;
        if (term.lo <= term.est->ci95_low && term.est->ci95_high <= term.hi) {
          ++passed;
        } else {
          misses += fmt::format(" [{} n={} {}: ci [{:.4g}, {:.4g}] vs [{:.4g}, {:.4g}]]", s.channel.describe(), n,
                                term.name, term.est->ci95_low, term.est->ci95_high, term.lo, term.hi);
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = passed >= 17 && elapsed < 300.0;
  return {ok, fmt::format("{}/{} term checks inside (need 17), {:.1f} s{}", passed, checks, elapsed, misses)};
}

Outcome criterion11() {
  Tally t;
  double worst = 0.0;
  for (double sigma : {0.6, 1.0}) {
    for (int i = -1000; i <= 1000; ++i) {
      const double z = i * 0.01;
      const double var = 2.0 * sigma * sigma;
      const double gauss = std::exp(-z * z / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
      const double cauchy = sigma / (std::numbers::pi * (sigma * sigma + z * z));
      const double e2 = std::abs(sas_density(2.0, sigma, z) - gauss) / gauss;
      const double e1 = std::abs(sas_density(1.0, sigma, z) - cauchy) / cauchy;
      worst = std::max({worst, e1, e2});
      t.check(e2 <= 1e-7, fmt::format("alpha=2 sigma={} z={} relative error {}", sigma, z, e2));
      t.check(e1 <= 1e-7, fmt::format("alpha=1 sigma={} z={} relative error {}", sigma, z, e1));
    }
  }
  const ChannelModel ch = ChannelModel::bi_sas(1.4, 0.6);
  const OutputGrid grid = output_grid(ch);
  double mass = 0.0;
  for (std::size_t j = 0; j < grid.y.size(); ++j) {
    mass += std::exp(grid.log_w[j] + log_noise_density(ch, grid.y[j] - ch.amplitude));
  }
  t.check(std::abs(mass - 1.0) <= 1e-6, fmt::format("alpha=1.4 mass {}", mass));
  return t.outcome(fmt::format("max closed-form error {:.3g}, alpha=1.4 mass error {:.3g}", worst, std::abs(mass - 1.0)));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion12() {
  const auto start = std::chrono::steady_clock::now();
  const auto dir = std::filesystem::temp_directory_path() / "certbound_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto overlay = dir / "validation.yaml";
  std::ofstream(overlay) << "validation: {samples: 10000, seed: 2024}\n";
  Tally t;
  for (auto preset : cli::kPresetNames) {
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      const auto out = dir / fmt::format("{}_{}.csv", preset, run);
      const std::string preset_s(preset);
      const std::string overlay_s = overlay.string();
      const std::string out_s = out.string();
      const char* argv[] = {"certbound", "figure",         "--preset", preset_s.c_str(), "--config",
                            overlay_s.c_str(), "--out", out_s.c_str(), "--threads", run == 0 ? "1" : "3"};
      const int code = cli::main_entry(static_cast<int>(std::size(argv)), argv);
      t.check(code == cli::kExitOk, fmt::format("{} run {} exit code {}", preset, run, code));
      outputs[run] = slurp(out);
    }
    t.check(!outputs[0].empty() && outputs[0] == outputs[1], fmt::format("{} outputs differ", preset));
  }
  std::filesystem::remove_all(dir);
  return t.outcome(fmt::format("{:.1f} s", seconds_since(start)));
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "envelope containment, Bernoulli sums", criterion1},
      {2, "envelope containment, chi-squared sums", criterion2},
      {3, "Gaussian saddlepoint exactness", criterion3},
      {4, "saddlepoint versus Berry-Esseen radius", criterion4},
      {5, "exponent and tilt solver properties", criterion5},
      {6, "dependence-testing sandwich on the BSC", criterion6},
      {7, "meta-converse sandwich on the BSC", criterion7},
      {8, "change-of-measure identities", criterion8},
      {9, "tilting commutes with convolution", criterion9},
      {10, "Monte Carlo validation on AWGN and SaS", criterion10},
      {11, "SaS density closed forms and mass", criterion11},
      {12, "byte-identical preset outputs", criterion12},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] criterion %2d: %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
