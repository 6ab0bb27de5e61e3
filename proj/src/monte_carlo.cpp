#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "certbound/error.hpp"
#include "certbound/oracle.hpp"

namespace certbound {
namespace {

constexpr std::size_t kShardSamples = 1u << 16;
constexpr std::size_t kMinSamples = 10'000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream for shard s: mt19937_64 seeded with splitmix64(seed ^ splitmix64(s)).
std::mt19937_64 shard_engine(std::uint64_t seed, std::size_t shard) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(shard))));
}

double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

// Inverse-CDF sampler with a guide table for O(1) expected lookups.
class InverseCdfSampler {
 public:
  explicit InverseCdfSampler(const Distribution& dist) : values_(dist.values().begin(), dist.values().end()) {
    const auto lw = dist.log_weights();
    cdf_.resize(lw.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < lw.size(); ++i) {
      acc += std::exp(lw[i]);
      cdf_[i] = acc;
    }
    for (double& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
    guide_.resize(cdf_.size());
    std::size_t i = 0;
    for (std::size_t g = 0; g < guide_.size(); ++g) {
      const double u = static_cast<double>(g) / static_cast<double>(guide_.size());
      while (cdf_[i] <= u) ++i;
      guide_[g] = i;
    }
  }

  double draw(std::mt19937_64& gen) const {
    const double u = uniform01(gen);
    std::size_t i = guide_[static_cast<std::size_t>(u * static_cast<double>(guide_.size()))];
    while (cdf_[i] <= u) ++i;
    return values_[i];
  }

 private:
  std::vector<double> values_;
  std::vector<double> cdf_;
  std::vector<std::size_t> guide_;
};

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
};

McEstimate finish(const Moments& m, std::size_t samples, std::uint64_t seed) {
  const double n = static_cast<double>(samples);
  McEstimate est;
  est.samples = samples;
  est.seed = seed;
  est.value = m.sum / n;
  const double var = std::max(0.0, (m.sum_sq - n * est.value * est.value) / (n - 1.0));
  est.stderr_ = std::sqrt(var / n);
  est.ci95_low = est.value - 1.96 * est.stderr_;
  est.ci95_high = est.value + 1.96 * est.stderr_;
  return est;
}

McEstimate constant_estimate(double value, std::size_t samples, std::uint64_t seed) {
  McEstimate est;
  est.value = est.ci95_low = est.ci95_high = value;
  est.samples = samples;
  est.seed = seed;
  return est;
}

// Runs `body(engine, count, moments)` over fixed shards and reduces the
// per-shard moments in shard order.
template <std::size_t K, typename Body>
std::array<Moments, K> run_shards(std::size_t samples, std::uint64_t seed, unsigned threads, Body body) {
  const std::size_t shards = (samples + kShardSamples - 1) / kShardSamples;
  std::vector<std::array<Moments, K>> partial(shards);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s = next++; s < shards; s = next++) {
      auto gen = shard_engine(seed, s);
      const std::size_t count = std::min(kShardSamples, samples - s * kShardSamples);
      body(gen, count, partial[s]);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(shards)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::array<Moments, K> total{};
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < K; ++k) {
      total[k].sum += p[k].sum;
      total[k].sum_sq += p[k].sum_sq;
    }
  }
  return total;
}

void check_mc_args(std::size_t n, std::size_t samples) {
  if (n == 0) throw Error(ErrorCode::BadParams, "n must be positive");
  if (samples < kMinSamples) throw Error(ErrorCode::BadParams, fmt::format("need at least {} samples", kMinSamples));
}

}  // namespace

McEstimate mc_cdf(const Distribution& dist, std::size_t n, double a, std::size_t samples, std::uint64_t seed,
                  unsigned threads) {
  check_mc_args(n, samples);
  if (std::isnan(a)) throw Error(ErrorCode::BadParams, "threshold is NaN");
  const double nd = static_cast<double>(n);
  if (a < nd * dist.min_value()) return constant_estimate(0.0, samples, seed);
  if (a >= nd * dist.max_value()) return constant_estimate(1.0, samples, seed);

  const InverseCdfSampler sampler(dist);
  const auto total = run_shards<1>(samples, seed, threads, [&](std::mt19937_64& gen, std::size_t count, auto& m) {
    for (std::size_t i = 0; i < count; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += sampler.draw(gen);
      m[0].add(s <= a ? 1.0 : 0.0);
    }
  });
  return finish(total[0], samples, seed);
}

McEstimate mc_fbl(const Distribution& density, std::size_t n, double threshold_log, std::size_t samples,
                  std::uint64_t seed, unsigned threads) {
  return mc_cdf(density, n, threshold_log, samples, seed, threads);
}

McFblTerms mc_fbl_terms(const Distribution& density, std::size_t n, double threshold_log, std::size_t samples,
                        std::uint64_t seed, unsigned threads) {
  check_mc_args(n, samples);
  if (!std::isfinite(threshold_log)) throw Error(ErrorCode::BadParams, "threshold must be finite");
  const InverseCdfSampler sampler(density);
  const double t = threshold_log;
  const auto total = run_shards<3>(samples, seed, threads, [&](std::mt19937_64& gen, std::size_t count, auto& m) {
    for (std::size_t i = 0; i < count; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += sampler.draw(gen);
      const double joint = s <= t ? 1.0 : 0.0;
      const double ind = s > t ? std::exp(t - s) : 0.0;
      m[0].add(joint);
      m[1].add(ind);
      m[2].add(joint + ind);
    }
  });
  return {finish(total[0], samples, seed), finish(total[1], samples, seed), finish(total[2], samples, seed)};
}

}  // namespace certbound
