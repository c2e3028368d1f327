#include <doctest.h>

#include <cmath>

#include "igflow/manifold.hpp"
#include "igflow/models.hpp"
#include "igflow/util.hpp"
#include "support/corrupted_models.hpp"
#include "support/oracles.hpp"

using namespace igflow;

TEST_CASE("gaussian coordinate maps") {
  const ModelDescriptor m = gaussian_model();
  // (mu, sigma^2) = (0, 1): theta^1 = mu/sigma^2, theta^2 = -1/(2 sigma^2)
  const CoordVector theta = coord_map(m, eta_vec({0.0, 1.0}));
  REQUIRE(theta.chart == Chart::theta);
  CHECK(std::abs(theta.values[0]) < 1e-15);
  CHECK(theta.values[1] == doctest::Approx(-0.5).epsilon(1e-15));

  const CoordVector eta = coord_map(m, theta_vec({0.0, -0.5}));
  REQUIRE(eta.chart == Chart::eta);
  CHECK(eta.values[0] == doctest::Approx(0.0).scale(1));
  CHECK(eta.values[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gamma coordinate map at (beta, nu) = (1, 1)") {
  const ModelDescriptor m = gamma_model();
  // eta = (nu/beta, digamma(nu) - ln beta) = (1, -gamma)
  const double eta2 = oracles::digamma(1.0);
  const CoordVector theta = coord_map(m, eta_vec({1.0, eta2}));
  CHECK(theta.values[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(theta.values[1]) < 1e-12);
}

TEST_CASE("metric_at closed forms") {
  const ModelDescriptor gauss = gaussian_model();
  const MetricMatrix g = metric_at(gauss, eta_vec({0.0, 1.0}));
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(0, 1) == doctest::Approx(0.0).scale(1));
  CHECK(g(1, 1) == doctest::Approx(2.0));

  const MetricMatrix gu = metric_at(gauss, theta_vec({0.0, -0.5}));
  CHECK(gu(0, 0) == doctest::Approx(1.0));
  CHECK(gu(0, 1) == doctest::Approx(0.0).scale(1));
  CHECK(gu(1, 1) == doctest::Approx(0.5));

  const ModelDescriptor gam = gamma_model();
  const CoordVector eta = eta_of(GammaParams{1.0, 1.0});
  const MetricMatrix gl = metric_at(gam, eta);
  CHECK(gl(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gl(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gl(1, 1) == doctest::Approx(oracles::kPiSquaredOver6).epsilon(1e-12));
}

TEST_CASE("legendre residual vanishes and detects a shifted potential") {
  const ModelDescriptor gauss = gaussian_model();
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const CoordVector theta =
        coord_map(gauss, eta_of(GaussianParams{rng.uniform(-3, 3), rng.uniform(0.1, 10)}));
    CHECK(legendre_residual(gauss, theta) < 1e-10);
  }
  const ModelDescriptor gam = gamma_model();
  CHECK(legendre_residual(gam, theta_of(GammaParams{2.0, 3.0})) < 1e-10);

  const ModelDescriptor bad = fault::with_shifted_psi(gamma_model(), 1.0);
  CHECK(legendre_residual(bad, theta_of(GammaParams{2.0, 3.0})) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("metric duality residual") {
  const ModelDescriptor gauss = gaussian_model();
  CHECK(metric_duality_residual(gauss, eta_of(GaussianParams{1.0, 2.0})) < 1e-10);
  const ModelDescriptor gam = gamma_model();
  CHECK(metric_duality_residual(gam, eta_of(GammaParams{0.5, 4.0})) < 1e-10);

  // trigamma biased by 1e-3 inside the lower metric
  const ModelDescriptor bad = fault::gamma_with_trigamma_bias(1e-3);
  CHECK(metric_duality_residual(bad, eta_of(GammaParams{1.0, 1.0})) > 1e-4);
}

TEST_CASE("finite-difference gradient check") {
  const ModelDescriptor gauss = gaussian_model();
  CHECK(fd_gradient_check(gauss, eta_vec({0.0, 1.0}), 1e-5) < 1e-7);
  const ModelDescriptor gam = gamma_model();
  CHECK(fd_gradient_check(gam, eta_of(GammaParams{1.0, 2.0}), 1e-5) < 1e-7);

  // theta-chart side differentiates Psi against eta(theta)
  CHECK(fd_gradient_check(gauss, theta_vec({0.5, -0.25}), 1e-5) < 1e-7);

  // second-order convergence: error ratio between h=1e-2 and h=1e-4 near 1e4
  const CoordVector x = eta_vec({0.4, 1.3});
  const double coarse = fd_gradient_check(gauss, x, 1e-2);
  const double fine = fd_gradient_check(gauss, x, 1e-4);
  CHECK(coarse / fine > 2e3);
  CHECK(coarse / fine < 5e4);
}

TEST_CASE("round trip, duality and legendre hold across the sampling boxes") {
  Rng rng(123);
  const ModelDescriptor gauss = gaussian_model();
  const ModelDescriptor gam = gamma_model();
  for (int i = 0; i < 200; ++i) {
    const CoordVector ge = eta_of(GaussianParams{rng.uniform(-3, 3), rng.uniform(0.1, 10)});
    const CoordVector gt = coord_map(gauss, ge);
    CHECK(max_abs_diff(coord_map(gauss, gt).values, ge.values) < 1e-10);
    CHECK(metric_duality_residual(gauss, ge) < 1e-9);
    CHECK(legendre_residual(gauss, gt) < 1e-9);

    const CoordVector me = eta_of(GammaParams{rng.uniform(0.2, 5), rng.uniform(0.5, 8)});
    const CoordVector mt = coord_map(gam, me);
    CHECK(max_abs_diff(coord_map(gam, mt).values, me.values) < 1e-10);
    CHECK(metric_duality_residual(gam, me) < 1e-9);
    CHECK(legendre_residual(gam, mt) < 1e-9);
  }
}

TEST_CASE("domain errors") {
  const ModelDescriptor gauss = gaussian_model();
  CHECK_THROWS_AS(coord_map(gauss, eta_vec({1.0, 0.5})), DomainError);   // eta2 - eta1^2 < 0
  CHECK_THROWS_AS(coord_map(gauss, theta_vec({0.0, 0.5})), DomainError); // theta2 > 0
  CHECK_THROWS_AS(coord_map(gauss, eta_vec({1.0})), DomainError);        // wrong dimension
  CHECK_THROWS_AS(metric_at(gauss, eta_vec({0.0, std::nan("")})), Error);

  const ModelDescriptor gam = gamma_model();
  CHECK_THROWS_AS(coord_map(gam, eta_vec({-1.0, -1.0})), DomainError);   // eta1 <= 0
  CHECK_THROWS_AS(coord_map(gam, eta_vec({1.0, 0.5})), DomainError);     // eta2 >= ln eta1
  CHECK_THROWS_AS(fd_gradient_check(gauss, eta_vec({0.0, 1.0}), 0.0), DomainError);
  // h so large the stencil exits the domain
  CHECK_THROWS_AS(fd_gradient_check(gauss, eta_vec({0.0, 0.2}), 1.0), DomainError);
}

TEST_CASE("analytic metric gradients match central differences") {
  const ModelDescriptor gauss = gaussian_model();
  const ModelDescriptor gam = gamma_model();

  auto compare = [](const ModelDescriptor& m, const CoordVector& x) {
    ModelDescriptor plain = m;  // strip the analytic pack to force FD
    plain.metric_lower_eta_grad_fn = nullptr;
    plain.metric_upper_theta_grad_fn = nullptr;
    if (x.chart == Chart::eta) {
      const auto analytic = metric_lower_eta_grad(m, x.values);
      const auto fd = metric_lower_eta_grad(plain, x.values);
      for (int i = 0; i < m.dim; ++i)
        for (int r = 0; r < m.dim; ++r)
          for (int c = 0; c < m.dim; ++c)
            CHECK(analytic[i](r, c) == doctest::Approx(fd[i](r, c)).epsilon(1e-6).scale(1.0));
    } else {
      const auto analytic = metric_upper_theta_grad(m, x.values);
      const auto fd = metric_upper_theta_grad(plain, x.values);
      for (int i = 0; i < m.dim; ++i)
        for (int r = 0; r < m.dim; ++r)
          for (int c = 0; c < m.dim; ++c)
            CHECK(analytic[i](r, c) == doctest::Approx(fd[i](r, c)).epsilon(1e-6).scale(1.0));
    }
  };

  compare(gauss, eta_of(GaussianParams{0.7, 2.0}));
  compare(gauss, theta_of(GaussianParams{-1.2, 0.8}));
  compare(gam, eta_of(GammaParams{1.5, 2.5}));
  compare(gam, theta_of(GammaParams{0.8, 4.0}));
}
