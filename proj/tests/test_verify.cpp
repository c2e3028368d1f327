#include <doctest.h>

#include <cmath>
#include <sstream>

#include "igflow/models.hpp"
#include "igflow/verify.hpp"
#include "support/corrupted_models.hpp"

using namespace igflow;

TEST_CASE("the full suite passes for the builtin models at seed 1") {
  for (const std::string id : {"gaussian", "gamma"}) {
    const std::vector<CheckReport> reports = run_suite(id, 1, IntegratorConfig{});
    CHECK(reports.size() >= 13);
    for (const CheckReport& r : reports) {
      INFO(r.check_id, " residual=", r.residual, " tol=", r.tolerance, " :: ", r.details);
      CHECK(r.pass);
      CHECK((r.pass == (r.residual <= r.tolerance)));
    }
  }
}

TEST_CASE("the suite passes for finite families across seeds") {
  const ModelDescriptor k3 = finite_exp_family({{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}});
  const ModelDescriptor k2 = finite_exp_family({{0.0}, {1.0}});
  for (const ModelDescriptor* m : {&k3, &k2}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      for (const CheckReport& r : run_suite(*m, "finite", seed, IntegratorConfig{})) {
        INFO("seed ", seed, " ", r.check_id, " residual=", r.residual, " :: ", r.details);
        CHECK(r.pass);
      }
    }
  }
}

TEST_CASE("suite output is deterministic per seed") {
  auto render = [](const std::vector<CheckReport>& reports) {
    std::ostringstream os;
    write_reports_jsonl(os, reports);
    return os.str();
  };
  const std::string a = render(run_suite("gaussian", 7, IntegratorConfig{}));
  const std::string b = render(run_suite("gaussian", 7, IntegratorConfig{}));
  CHECK(a == b);
  const std::string c = render(run_suite("gaussian", 8, IntegratorConfig{}));
  CHECK(a != c);  // different points, different residual digits
}

TEST_CASE("reports are sorted by check id") {
  const std::vector<CheckReport> reports = run_suite("gamma", 1, IntegratorConfig{});
  for (std::size_t i = 1; i < reports.size(); ++i)
    CHECK(reports[i - 1].check_id <= reports[i].check_id);
}

TEST_CASE("a factor-2 metric bug is caught by the duality check") {
  const ModelDescriptor bad = fault::gaussian_with_metric_bug();
  const std::vector<CheckReport> reports = run_suite(bad, "gaussian", 1, IntegratorConfig{});
  CHECK_FALSE(all_pass(reports));
  bool found = false;
  for (const CheckReport& r : reports) {
    if (r.check_id == "manifold.metric_duality") {
      found = true;
      CHECK_FALSE(r.pass);
      CHECK(r.residual > 0.4);
      CHECK(r.residual < 0.6);
    }
  }
  CHECK(found);
}

TEST_CASE("a 1e-3 trigamma bias is caught") {
  const ModelDescriptor bad = fault::gamma_with_trigamma_bias(1e-3);
  const std::vector<CheckReport> reports = run_suite(bad, "gamma", 1, IntegratorConfig{});
  CHECK_FALSE(all_pass(reports));
  for (const CheckReport& r : reports) {
    if (r.check_id == "manifold.metric_duality") {
      CHECK_FALSE(r.pass);
      CHECK(r.residual > 1e-4);
    }
  }
}

TEST_CASE("the suite also passes under the adaptive integrator") {
  IntegratorConfig cfg;
  cfg.method = IntegratorMethod::rkf45_adaptive;
  cfg.step = 0.01;
  for (const std::string id : {"gaussian", "gamma"}) {
    for (const CheckReport& r : run_suite(id, 1, cfg)) {
      INFO(r.check_id, " residual=", r.residual, " tol=", r.tolerance);
      CHECK(r.pass);
    }
  }
}

TEST_CASE("unknown model ids are rejected") {
  CHECK_THROWS_AS(run_suite("unknown", 1, IntegratorConfig{}), UnknownModelError);
}

TEST_CASE("time map checks") {
  const ModelDescriptor gauss = gaussian_model();
  const ModelDescriptor gam = gamma_model();
  IntegratorConfig cfg;

  const Trajectory ge = gradient_flow(gauss, eta_of(GaussianParams{1.0, 1.0}), {0.0, 1.0}, cfg);
  const CheckReport r1 = time_map_check("gaussian", ge);
  CHECK(r1.pass);
  CHECK(r1.residual < 1e-7);

  const Trajectory me = gradient_flow(gam, eta_of(GammaParams{2.0, 3.0}), {0.0, 1.0}, cfg);
  const CheckReport r2 = time_map_check("gamma", me);
  CHECK(r2.pass);
  CHECK(r2.residual < 1e-7);

  const CoordVector theta0 = coord_map(gauss, eta_of(GaussianParams{1.0, 4.0}));
  const Trajectory gt = gradient_flow(gauss, theta0, {0.0, 1.0}, cfg);
  const CheckReport r3 = time_map_check("gaussian", gt);
  CHECK(r3.pass);
  CHECK(r3.residual < 1e-7);

  CHECK_THROWS_AS(time_map_check("gamma", ge), ModelMismatchError);   // wrong model
  const Trajectory geo = geodesic_flow(
      geodesic_eta_spec(std::make_shared<const ModelDescriptor>(gauss)),
      consistent_state(gauss, eta_of(GaussianParams{0.0, 1.0})), {0.0, 0.5}, cfg);
  CHECK_THROWS_AS(time_map_check("gaussian", geo), ModelMismatchError);  // no rule
}

TEST_CASE("second-set gaussian check: growth law and sigma-mu relation") {
  const ModelDescriptor gauss = gaussian_model();
  IntegratorConfig cfg;
  const CoordVector theta0 = coord_map(gauss, eta_of(GaussianParams{1.0, 4.0}));
  const Trajectory traj = gradient_flow(gauss, theta0, {0.0, 1.4}, cfg);
  const CheckReport r = second_set_gaussian_check(traj);
  INFO(r.details);
  CHECK(r.pass);

  // eta2(t) = 5 e^t along the same flow
  for (const FlowSample& s : traj.samples)
    CHECK(std::abs(s.eta[1] - 5.0 * std::exp(s.t)) < 1e-6);
}

TEST_CASE("second-set check rejects the degenerate mu = 0 start") {
  const ModelDescriptor gauss = gaussian_model();
  const Trajectory traj = gradient_flow(gauss, coord_map(gauss, eta_of(GaussianParams{0.0, 1.0})),
                                        {0.0, 0.5}, IntegratorConfig{});
  CHECK_THROWS_AS(second_set_gaussian_check(traj), ModelMismatchError);
  // and a wrong flow kind
  const Trajectory eflow =
      gradient_flow(gauss, eta_of(GaussianParams{1.0, 1.0}), {0.0, 0.5}, IntegratorConfig{});
  CHECK_THROWS_AS(second_set_gaussian_check(eflow), ModelMismatchError);
}

TEST_CASE("jsonl report format") {
  std::ostringstream os;
  CheckReport r;
  r.check_id = "demo.check";
  r.model = "gaussian";
  r.residual = 1.5e-11;
  r.tolerance = 1e-9;
  r.pass = true;
  r.details = "demo";
  write_reports_jsonl(os, {r});
  CHECK(os.str() ==
        "{\"check_id\":\"demo.check\",\"model\":\"gaussian\",\"residual\":1.5e-11,"
        "\"tolerance\":1e-09,\"pass\":true,\"details\":\"demo\"}\n");
}
