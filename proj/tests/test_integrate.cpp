#include <doctest.h>

#include <cmath>

#include "igflow/integrate.hpp"

using namespace igflow;

namespace {

const OdeRhs kDecay = [](double, const std::vector<double>& y, std::vector<double>& dy) {
  dy[0] = -y[0];
};

}  // namespace

TEST_CASE("rk4 integrates exponential decay accurately") {
  IntegratorConfig cfg;
  const OdeResult res = integrate_ode(kDecay, {1.0}, {0.0, 1.0}, cfg);
  CHECK(res.status == FlowStatus::complete);
  CHECK(res.u.back() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(res.y.back()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("rkf45 meets its tolerance on the harmonic oscillator") {
  IntegratorConfig cfg;
  cfg.method = IntegratorMethod::rkf45_adaptive;
  cfg.abs_tol = 1e-10;
  cfg.rel_tol = 1e-10;
  cfg.step = 0.1;
  const OdeRhs osc = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  const OdeResult res = integrate_ode(osc, {1.0, 0.0}, {0.0, 2.0 * M_PI}, cfg);
  CHECK(res.y.back()[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(res.y.back()[1] == doctest::Approx(0.0).scale(1).epsilon(1e-7));
  CHECK(res.u.size() > 10);  // actually adapted
}

TEST_CASE("zero-length span returns the initial sample only") {
  const OdeResult res = integrate_ode(kDecay, {3.0}, {2.0, 2.0}, IntegratorConfig{});
  REQUIRE(res.u.size() == 1);
  CHECK(res.u[0] == 2.0);
  CHECK(res.y[0][0] == 3.0);
}

TEST_CASE("step limit raises StepLimitError") {
  IntegratorConfig cfg;
  cfg.max_steps = 10;
  CHECK_THROWS_AS(integrate_ode(kDecay, {1.0}, {0.0, 1.0}, cfg), StepLimitError);
}

TEST_CASE("domain guard truncates or throws") {
  // rhs valid only while y > 0.5
  const OdeRhs guarded = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    if (y[0] <= 0.5) throw DomainError("left the half-line");
    dy[0] = -y[0];
  };
  IntegratorConfig cfg;
  cfg.domain_guard = DomainGuard::truncate_trajectory;
  const OdeResult res = integrate_ode(guarded, {1.0}, {0.0, 2.0}, cfg);
  CHECK(res.status == FlowStatus::domain_exit);
  // stops near y = 0.5, i.e. t near ln 2
  CHECK(res.y.back()[0] > 0.49);
  CHECK(res.u.back() == doctest::Approx(std::log(2.0)).epsilon(0.01));

  cfg.domain_guard = DomainGuard::stop_with_error;
  CHECK_THROWS_AS(integrate_ode(guarded, {1.0}, {0.0, 2.0}, cfg), DomainExitError);
}

TEST_CASE("config validation") {
  IntegratorConfig cfg;
  cfg.step = 0.0;
  CHECK_THROWS_AS(integrate_ode(kDecay, {1.0}, {0.0, 1.0}, cfg), ConfigError);
  CHECK_THROWS_AS(integrate_ode(kDecay, {1.0}, {1.0, 0.0}, IntegratorConfig{}), ConfigError);
  CHECK_THROWS_AS(integrate_ode(kDecay, {std::nan("")}, {0.0, 1.0}, IntegratorConfig{}),
                  NonFiniteError);
}
