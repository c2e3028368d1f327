#include <doctest.h>

#include <cmath>

#include "igflow/linalg.hpp"
#include "igflow/util.hpp"

using namespace igflow;

namespace {

MetricMatrix spd2(double a, double b, double c) {
  MetricMatrix g(2);
  g(0, 0) = a;
  g(0, 1) = g(1, 0) = b;
  g(1, 1) = c;
  return g;
}

}  // namespace

TEST_CASE("cholesky and inverse round-trip") {
  const MetricMatrix g = spd2(4.0, 1.0, 3.0);
  MetricMatrix lower;
  REQUIRE(cholesky(g, lower));
  const MetricMatrix inv = inverse_spd(g);
  CHECK(identity_residual(inv, g) < 1e-14);
  CHECK(identity_residual(g, inv) < 1e-14);
}

TEST_CASE("validate_metric rejects bad matrices") {
  MetricMatrix asym(2);
  asym(0, 0) = 1.0;
  asym(0, 1) = 0.5;
  asym(1, 0) = 0.5 + 1e-6;
  asym(1, 1) = 1.0;
  CHECK_THROWS_AS(validate_metric(asym), SingularMetricError);

  const MetricMatrix indefinite = spd2(1.0, 2.0, 1.0);  // det < 0
  CHECK_THROWS_AS(validate_metric(indefinite), SingularMetricError);

  MetricMatrix bad(2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(validate_metric(bad), NonFiniteError);

  CHECK_NOTHROW(validate_metric(spd2(2.0, 0.3, 1.0)));
}

TEST_CASE("quad_form and mat_vec agree") {
  const MetricMatrix g = spd2(2.0, -0.5, 1.5);
  const std::vector<double> x{1.0, 2.0};
  const std::vector<double> y{-3.0, 0.5};
  const std::vector<double> gx = mat_vec(g, x);
  double dot = 0.0;
  for (int i = 0; i < 2; ++i) dot += y[i] * gx[i];
  CHECK(quad_form(g, y, x) == doctest::Approx(dot).epsilon(1e-15));
}

TEST_CASE("random SPD matrices invert cleanly") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2), c = rng.uniform(-2, 2),
           d = rng.uniform(-2, 2);
    MetricMatrix g(2);  // A^T A + I is SPD
    g(0, 0) = a * a + c * c + 1.0;
    g(0, 1) = g(1, 0) = a * b + c * d;
    g(1, 1) = b * b + d * d + 1.0;
    const MetricMatrix inv = inverse_spd(g);
    CHECK(identity_residual(inv, g) < 1e-12);
  }
}
