#include <doctest.h>

#include <cmath>

#include "rdlocal/errors.hpp"
#include "rdlocal/stats.hpp"

using namespace rdlocal;

TEST_CASE("normal quantile matches reference values") {
  // Reference values computed with 50-digit arithmetic.
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(normal_quantile(0.975) ==
        doctest::Approx(1.9599639845400542).epsilon(1e-13));
  CHECK(normal_quantile(0.995) ==
        doctest::Approx(2.5758293035489008).epsilon(1e-13));
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-13));
  CHECK(normal_quantile(0.025) ==
        doctest::Approx(-1.9599639845400542).epsilon(1e-13));
}

TEST_CASE("normal quantile and cdf are inverse") {
  for (double p : {1e-8, 1e-4, 0.01, 0.2, 0.5, 0.7, 0.99, 1.0 - 1e-6}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("normal quantile is antisymmetric") {
  for (double p : {0.001, 0.12, 0.34, 0.47}) {
    CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-12));
  }
}

TEST_CASE("normal cdf basics") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(-40.0) >= 0.0);
  CHECK(normal_cdf(40.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("normal quantile rejects boundary probabilities") {
  CHECK_THROWS_AS(normal_quantile(0.0), parameter_error);
  CHECK_THROWS_AS(normal_quantile(1.0), parameter_error);
  CHECK_THROWS_AS(normal_quantile(-0.1), parameter_error);
  CHECK_THROWS_AS(normal_quantile(1.1), parameter_error);
}
