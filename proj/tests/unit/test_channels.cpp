#include <doctest.h>

#include <cmath>
#include <initializer_list>

#include "certbound/channels.hpp"
#include "certbound/error.hpp"
#include "certbound/stable.hpp"

using namespace certbound;

namespace {

void check_shift_identity(const DensityBuild& d, double tol) {
  for (double t : {-1.5, -1.0, -0.5, 0.0, 0.5, 1.0}) {
    CAPTURE(t);
    const auto joint = tilted_moments(d.joint, t);
    const auto ind = tilted_moments(d.independent, t + 1.0);
    CHECK(std::abs(joint.k - ind.k) <= tol);
    CHECK(std::abs(joint.k1 - ind.k1) <= tol);
    CHECK(std::abs(joint.k2 - ind.k2) <= tol);
    CHECK(std::abs(joint.xi - ind.xi) <= tol);
  }
}

}  // namespace

TEST_CASE("BSC information density is a two-point law") {
  const auto d = build_density_dist(ChannelModel::bsc(0.11));
  REQUIRE(d.joint.size() == 2);
  CHECK(d.joint.values()[0] == doctest::Approx(std::log(0.22)));
  CHECK(d.joint.values()[1] == doctest::Approx(std::log(1.78)));
  CHECK(d.joint.mean() == doctest::Approx(0.34663184364127916).epsilon(1e-14));
  CHECK(log_mgf(d.joint, -1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  check_shift_identity(d, 1e-12);
}

TEST_CASE("BI-AWGN mean information density is the capacity in nats") {
  const auto d = build_density_dist(ChannelModel::bi_awgn(1.0));
  CHECK(d.joint.mean() == doctest::Approx(0.33683082034683161).epsilon(1e-9));
  CHECK(d.joint.max_value() <= std::log(2.0));
  CHECK(std::abs(log_mgf(d.joint, -1.0)) <= 1e-12);
  check_shift_identity(d, 1e-9);
}

TEST_CASE("the two input signs give the same law") {
  const auto ch = ChannelModel::bi_sas(1.4, 0.6);
  const auto plus = build_density_dist(ch, 1001, 1);
  const auto minus = build_density_dist(ch, 1001, -1);
  for (double t : {-0.5, 0.5}) {
    CHECK(log_mgf(plus.joint, t) == doctest::Approx(log_mgf(minus.joint, t)).epsilon(1e-12));
  }
}

TEST_CASE("SaS channel density is normalized on its output grid") {
  const auto ch = ChannelModel::bi_sas(1.4, 0.6);
  const auto grid = output_grid(ch);
  double total = 0.0;
  for (std::size_t j = 0; j < grid.y.size(); ++j) total += std::exp(grid.log_w[j] + log_noise_density(ch, grid.y[j] - 1.0));
  CHECK(std::abs(total - 1.0) <= 1e-6);
  const auto d = build_density_dist(ch);
  check_shift_identity(d, 1e-9);
  CHECK(d.joint.kind() == DistributionKind::Quadrature);
}

TEST_CASE("the stable truncation sits where the density has fallen by 1e-12") {
  const auto ch = ChannelModel::bi_sas(1.4, 0.6);
  const auto grid = output_grid(ch);
  const double edge = grid.y.back() - ch.amplitude;
  CHECK(sas_density(1.4, 0.6, edge) == doctest::Approx(kStableTruncation * sas_density(1.4, 0.6, 0.0)).epsilon(1e-6));
}

TEST_CASE("invalid channels and node counts are rejected") {
  CHECK_THROWS_AS(build_density_dist(ChannelModel::bsc(0.0)), Error);
  CHECK_THROWS_AS(build_density_dist(ChannelModel::bsc(0.6)), Error);
  CHECK_THROWS_AS(build_density_dist(ChannelModel::bsc(0.5)), Error);
  CHECK_THROWS_AS(build_density_dist(ChannelModel::bi_awgn(-1.0)), Error);
  CHECK_THROWS_AS(build_density_dist(ChannelModel::bi_sas(2.1, 1.0)), Error);
  try {
    build_density_dist(ChannelModel::bi_awgn(1.0), 11);
    FAIL("expected QuadratureBudget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::QuadratureBudget);
  }
}
