#include <cmath>

#include "doctest.h"
#include "plucase/stats.hpp"
#include "support/oracles.hpp"

using namespace plucase;

TEST_SUITE("stats") {

TEST_CASE("erfc matches the standard library") {
  for (double x = -6.0; x <= 6.0; x += 0.0625) {
    double got = stats::erfc(x);
    double want = std::erfc(x);
    CHECK(std::abs(got - want) <= 1e-12 + 1e-12 * std::abs(want));
  }
  CHECK(stats::erfc(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(stats::erfc(27.0) == doctest::Approx(0.0).epsilon(1e-300));
  CHECK(stats::erfc(-27.0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("normal_cdf agrees with the erfc oracle on a dense grid") {
  for (double z = -6.0; z <= 6.0; z += 0.01) {
    double got = stats::normal_cdf(z);
    double want = testing::normal_cdf_oracle(z);
    CHECK(std::abs(got - want) <= 1e-9);
  }
}

TEST_CASE("normal_cdf pins known quantiles") {
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(stats::normal_cdf(1.959963984540054) ==
        doctest::Approx(0.975).epsilon(1e-12));
  CHECK(stats::normal_cdf(-1.959963984540054) ==
        doctest::Approx(0.025).epsilon(1e-12));
  CHECK(stats::normal_cdf(1.0) == doctest::Approx(0.8413447460685429));
  CHECK(stats::normal_cdf(-2.575829303548901) ==
        doctest::Approx(0.005).epsilon(1e-11));
}

TEST_CASE("normal_cdf is symmetric and monotone") {
  double prev = -1.0;
  for (double z = -8.0; z <= 8.0; z += 0.125) {
    double p = stats::normal_cdf(z);
    CHECK(p >= prev);
    prev = p;
    double q = stats::normal_cdf(-z);
    CHECK(std::abs(p + q - 1.0) <= 1e-14);
  }
}

TEST_CASE("deep tails keep relative accuracy") {
  for (double z : {-8.0, -10.0, -12.0, -15.0}) {
    double got = stats::normal_cdf(z);
    double want = testing::normal_cdf_oracle(z);
    CHECK(got > 0.0);
    CHECK(std::abs(got - want) <= 1e-10 * want);
  }
}

}
