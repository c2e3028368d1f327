#include <doctest.h>

#include <cmath>

#include "igflow/special_functions.hpp"
#include "igflow/errors.hpp"
#include "support/oracles.hpp"

using namespace igflow;

TEST_CASE("trigamma(1) is pi^2/6") {
  // Frozen from the direct series sum_{n>=1} 1/n^2.
  const double expected = oracles::trigamma(1.0);
  CHECK(expected == doctest::Approx(oracles::kPiSquaredOver6).epsilon(1e-14));
  CHECK(polygamma(1, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(polygamma(1, 1.0) == doctest::Approx(1.6449341).epsilon(1e-7));
}

TEST_CASE("digamma(1) is minus Euler's constant") {
  const double expected = oracles::digamma(1.0);
  CHECK(expected == doctest::Approx(-oracles::kEulerGamma).epsilon(1e-14));
  CHECK(polygamma(0, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(polygamma(0, 1.0) == doctest::Approx(-0.5772157).epsilon(1e-7));
}

TEST_CASE("digamma recurrence phi(x+1) = phi(x) + 1/x") {
  CHECK(polygamma(0, 2.0) - polygamma(0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (double x : {0.3, 1.7, 4.9, 11.0}) {
    CHECK(digamma(x + 1.0) - digamma(x) == doctest::Approx(1.0 / x).epsilon(1e-13));
    CHECK(trigamma(x) - trigamma(x + 1.0) == doctest::Approx(1.0 / (x * x)).epsilon(1e-13));
  }
}

TEST_CASE("polygamma matches the series oracles to 1e-12 relative") {
  for (double x = 0.05; x < 60.0; x *= 1.7) {
    const double d_ref = oracles::digamma(x);
    const double t_ref = oracles::trigamma(x);
    CHECK(std::abs(digamma(x) - d_ref) <= 1e-12 * std::max(1.0, std::abs(d_ref)));
    CHECK(std::abs(trigamma(x) - t_ref) <= 1e-12 * std::max(1.0, std::abs(t_ref)));
  }
}

TEST_CASE("internal tetragamma matches its series oracle") {
  for (double x : {0.5, 1.0, 2.3, 6.0, 9.5, 20.0}) {
    const double ref = oracles::tetragamma(x);
    CHECK(std::abs(detail::tetragamma(x) - ref) <= 1e-11 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("polygamma domain errors") {
  CHECK_THROWS_AS(polygamma(0, 0.0), DomainError);
  CHECK_THROWS_AS(polygamma(1, -2.0), DomainError);
  CHECK_THROWS_AS(polygamma(2, 1.0), DomainError);
  CHECK_THROWS_AS(polygamma(-1, 1.0), DomainError);
}
