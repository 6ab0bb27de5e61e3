#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <thread>

#include <fmt/format.h>

#include "certbound/cli.hpp"
#include "certbound/error.hpp"
#include "certbound/fbl.hpp"
#include "certbound/oracle.hpp"
#include "certbound/saddlepoint.hpp"

namespace certbound::cli {
namespace {

constexpr std::string_view kFlagErrorPrefix = "error:";

struct RowResult {
  std::vector<Cell> cells;
  std::optional<RowFailure> failure;
};

Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

void append_flag(std::string& flags, std::string_view flag) {
  if (flag.empty()) return;
  if (!flags.empty()) flags += ';';
  flags += flag;
}

// Evaluates rows in parallel; results land in grid order.
std::vector<RowResult> evaluate(std::size_t rows, unsigned threads, const std::function<RowResult(std::size_t)>& row) {
  std::vector<RowResult> out(rows);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows; i = next++) out[i] = row(i);
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rows)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

std::uint64_t row_seed(const Validation& v, std::size_t row) { return v.seed + static_cast<std::uint64_t>(row); }

// ---- sum-cdf ---------------------------------------------------------------

struct SumModel {
  Distribution dist;
  std::function<std::optional<double>(double)> exact;
};

SumModel build_sum_model(const DistributionSpec& spec, std::size_t n) {
  const double nd = static_cast<double>(n);
  switch (spec.kind) {
    case LawKind::Bernoulli:
      return {Distribution::bernoulli(spec.p),
              [n, p = spec.p](double a) { return std::optional<double>(exact_cdf(BinomialLaw{n, p}, a)); }};
    case LawKind::ChiSquared:
      return {chi_squared_quadrature(spec.nodes),
              [nd](double a) { return std::optional<double>(exact_cdf(GammaLaw{0.5 * nd, 2.0}, a)); }};
    case LawKind::Gaussian:
      return {gaussian_quadrature(spec.mean, spec.variance, spec.nodes),
              [nd, m = spec.mean, v = spec.variance](double a) {
                return std::optional<double>(exact_cdf(GaussianLaw{nd * m, nd * v}, a));
              }};
    case LawKind::Discrete: {
      Distribution dist = Distribution::from_weights(spec.values, spec.weights);
      std::shared_ptr<const Distribution> sum;
      try {
        sum = std::make_shared<const Distribution>(convolve_sum(dist, n));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TooLarge) throw;
      }
      return {std::move(dist), [sum](double a) -> std::optional<double> {
                if (!sum) return std::nullopt;
                const double tol = 1e-12 * std::max(std::abs(sum->min_value()), std::abs(sum->max_value()));
                double total = 0.0;
                for (std::size_t i = 0; i < sum->size() && sum->values()[i] <= a + tol; ++i) {
                  total += std::exp(sum->log_weights()[i]);
                }
                return std::min(1.0, total);
              }};
    }
  }
  throw Error(ErrorCode::BadParams, "unknown distribution kind");
}

Table run_sum_cdf(const RunConfig& cfg, unsigned threads) {
  const SumModel model = build_sum_model(*cfg.distribution, cfg.n);
  const std::vector<double> grid = cfg.a_grid.values();
  Table table;
  table.columns = {"a",      "exact",     "normal_center", "normal_lo", "normal_hi", "sp_center",
                   "sp_lo",  "sp_hi",     "theta_star",    "h"};
  if (cfg.validation) table.columns.insert(table.columns.end(), {"mc_estimate", "mc_ci_lo", "mc_ci_hi"});
  table.columns.emplace_back("flags");

  const auto results = evaluate(grid.size(), threads, [&](std::size_t i) {
    const double a = grid[i];
    RowResult r;
    std::string flags;
    r.cells.emplace_back(a);
    try {
      r.cells.push_back(opt(model.exact(a)));
      const BoundEnvelope be = berry_esseen_envelope(model.dist, cfg.n, a);
      r.cells.insert(r.cells.end(), {be.center, be.lower, be.upper});
      try {
        const SaddlepointSolve sol = solve_theta_star(model.dist, cfg.n, a);
        const BoundEnvelope sp = thm3_envelope(model.dist, cfg.n, a);
        r.cells.insert(r.cells.end(), {sp.center, sp.lower, sp.upper, sol.theta_star, exponent_h(model.dist, cfg.n, a)});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OutOfHull) throw;
        r.cells.insert(r.cells.end(), 5, Cell{});
        append_flag(flags, flags_to_string(kFlagOutOfHull));
      }
      if (cfg.validation) {
        const McEstimate mc = mc_cdf(model.dist, cfg.n, a, cfg.validation->samples, row_seed(*cfg.validation, i));
        r.cells.insert(r.cells.end(), {mc.value, mc.ci95_low, mc.ci95_high});
      }
    } catch (const Error& e) {
      r.cells.resize(1);
      r.cells.resize(table.columns.size() - 1);
      append_flag(flags, fmt::format("{}{}", kFlagErrorPrefix, to_string(e.code())));
      r.failure = RowFailure{i, fmt::format("a={}", a), e.what()};
    }
    r.cells.emplace_back(flags);
    return r;
  });
  for (const auto& r : results) {
    table.rows.push_back(r.cells);
    if (r.failure) table.failures.push_back(*r.failure);
  }
  return table;
}

// ---- dt-curve / mc-curve ----------------------------------------------------

Table run_fbl_curve(const RunConfig& cfg, unsigned threads) {
  const bool mc = cfg.command == Command::McCurve;
  const DensityBuild density = build_density_dist(cfg.channel->model, cfg.channel->nodes);
  const bool has_exact = cfg.channel->model.kind == ChannelKind::Bsc;
  const std::vector<double> grid = cfg.n_grid.values();

  Table table;
  table.columns = {"n", "M_log2"};
  if (mc) table.columns.emplace_back("log_gamma");
  table.columns.insert(table.columns.end(), {"theta", "D", "alpha", "N", "G", "beta", "S"});
  if (has_exact) table.columns.emplace_back("exact");
  if (cfg.validation) table.columns.insert(table.columns.end(), {"mc_estimate", "mc_ci_lo", "mc_ci_hi"});
  table.columns.emplace_back("flags");

  const auto results = evaluate(grid.size(), threads, [&](std::size_t i) {
    const auto n = static_cast<std::size_t>(grid[i]);
    const CodeSize m = CodeSize::from_rate(n, cfg.rate);
    RowResult r;
    std::string flags;
    r.cells.insert(r.cells.end(), {static_cast<double>(n), m.log2_m});
    try {
      FblPoint p;
      bool in_hull = true;
      try {
        p = mc ? mc_optimize_gamma(density, n, m).point : dt_bounds(density, n, m);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OutOfHull && e.code() != ErrorCode::NoBracket) throw;
        in_hull = false;
      }
      if (in_hull) {
        if (mc) r.cells.emplace_back(p.log_gamma);
        r.cells.insert(r.cells.end(), {p.theta, p.normal.d, p.normal.alpha, p.normal.n_upper, p.sp.g, p.sp.beta, p.sp.s});
        if (has_exact) r.cells.push_back(opt(p.exact));
        append_flag(flags, flags_to_string(p.flags));
      } else {
        if (mc) r.cells.emplace_back();
        r.cells.emplace_back();
        if (mc) {
          r.cells.insert(r.cells.end(), 3, Cell{});
        } else {
          const NormalTriple nt = dt_normal(density, n, m);
          r.cells.insert(r.cells.end(), {nt.d, nt.alpha, nt.n_upper});
        }
        r.cells.insert(r.cells.end(), 3, Cell{});
        if (has_exact) r.cells.push_back(mc ? Cell{} : Cell{bsc_exact_t(cfg.channel->model.delta, n, m)});
        append_flag(flags, flags_to_string(kFlagOutOfHull));
      }
      if (cfg.validation) {
        if (in_hull) {
          const double t = mc ? p.log_gamma : m.dt_threshold();
          const double penalty = mc ? std::exp(p.log_gamma - m.ln_m()) : 0.0;
          const McFblTerms terms =
              mc_fbl_terms(density.joint, n, t, cfg.validation->samples, row_seed(*cfg.validation, i));
          r.cells.insert(r.cells.end(),
                         {terms.sum.value - penalty, terms.sum.ci95_low - penalty, terms.sum.ci95_high - penalty});
        } else {
          r.cells.insert(r.cells.end(), 3, Cell{});
        }
      }
    } catch (const Error& e) {
      r.cells.resize(2);
      r.cells.resize(table.columns.size() - 1);
      append_flag(flags, fmt::format("{}{}", kFlagErrorPrefix, to_string(e.code())));
      r.failure = RowFailure{i, fmt::format("n={}", n), e.what()};
    }
    r.cells.emplace_back(flags);
    return r;
  });
  for (const auto& r : results) {
    table.rows.push_back(r.cells);
    if (r.failure) table.failures.push_back(*r.failure);
  }
  return table;
}

}  // namespace

Table run(const RunConfig& cfg, unsigned threads) {
  validate_config(cfg);
  return cfg.command == Command::SumCdf ? run_sum_cdf(cfg, threads) : run_fbl_curve(cfg, threads);
}

}  // namespace certbound::cli
