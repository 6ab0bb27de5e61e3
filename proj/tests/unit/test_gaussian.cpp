#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <limits>

#include "certbound/gaussian.hpp"

using namespace certbound;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_CASE("erfcx matches high-precision references") {
  struct Case {
    double x, want;
  };
  const Case cases[] = {{0.0, 1.0},
                        {0.5, 0.61569034419292587},
                        {3.0, 0.17900115118138995},
                        {26.0, 0.021683584850562907},
                        {1e3, 0.00056418930145338765},
                        {-2.0, 108.94090438997797}};
  for (const auto& c : cases) {
    CAPTURE(c.x);
    CHECK(rel_err(erfcx(c.x), c.want) < 1e-14);
  }
}

TEST_CASE("log_gaussian_q stays finite deep in the tail") {
  CHECK(rel_err(log_gaussian_q(-3.0), -0.0013508099647481938) < 1e-13);
  CHECK(rel_err(log_gaussian_q(0.0), -0.69314718055994531) < 1e-15);
  CHECK(rel_err(log_gaussian_q(2.5), -5.0816482772786905) < 1e-14);
  CHECK(rel_err(log_gaussian_q(10.0), -53.231285150512471) < 1e-14);
  CHECK(rel_err(log_gaussian_q(40.0), -804.60844201375379) < 1e-14);
  CHECK(std::isfinite(log_gaussian_q(1e4)));
}

TEST_CASE("gaussian_q and gaussian_cdf are complementary") {
  for (double v = -8.0; v <= 8.0; v += 0.25) {
    CAPTURE(v);
    CHECK(gaussian_q(v) + gaussian_cdf(v) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gaussian_q(v) == doctest::Approx(gaussian_cdf(-v)).epsilon(1e-15));
  }
  CHECK(gaussian_q(0.0) == 0.5);
}

TEST_CASE("gaussian_q is monotone and in [0, 1]") {
  double prev = 1.0;
  for (double v = -40.0; v <= 40.0; v += 0.01) {
    const double q = gaussian_q(v);
    REQUIRE(q >= 0.0);
    REQUIRE(q <= 1.0);
    REQUIRE(q <= prev);
    prev = q;
  }
}

TEST_CASE("gaussian_q(40) underflows to zero while its log does not") {
  CHECK(gaussian_q(40.0) == 0.0);
  CHECK(log_gaussian_q(40.0) < -800.0);
}

TEST_CASE("log_exp_times_q combines factors that overflow separately") {
  CHECK(rel_err(log_exp_times_q(800.0, 38.0), 73.44278398117987) < 1e-13);
  CHECK(log_exp_times_q(0.0, 0.0) == doctest::Approx(std::log(0.5)));
  for (double u : {-5.0, 0.0, 3.0}) {
    for (double v : {-2.0, 0.5, 4.0}) {
      CHECK(log_exp_times_q(u, v) == doctest::Approx(u + std::log(gaussian_q(v))).epsilon(1e-13));
    }
  }
}

TEST_CASE("NaN inputs propagate") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(std::isnan(erfcx(nan)));
  CHECK(std::isnan(gaussian_q(nan)));
  CHECK(std::isnan(log_gaussian_q(nan)));
}
