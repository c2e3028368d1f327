#include "igflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "igflow/io.hpp"
#include "igflow/optics.hpp"
#include "igflow/replicator.hpp"
#include "igflow/util.hpp"

namespace igflow {

namespace {

enum class Family { gaussian, gamma, finite };

Family family_of(const ModelDescriptor& m) {
  if (m.finite_family) return Family::finite;
  if (m.id.rfind("gamma", 0) == 0) return Family::gamma;
  if (m.id.rfind("gaussian", 0) == 0) return Family::gaussian;
  throw UnknownModelError("run_suite: unrecognized model family '" + m.id + "'");
}

struct Ctx {
  const ModelDescriptor& model;
  std::shared_ptr<const ModelDescriptor> model_ptr;
  std::string label;
  std::uint64_t seed;
  IntegratorConfig cfg;
  Family family;
};

Rng check_rng(const Ctx& ctx, std::string_view check_id) {
  return Rng(ctx.seed * 0x9e3779b97f4a7c15ull + fnv1a(check_id));
}

// Seeded eta-chart domain point. Boxes: gaussian mu in [-3,3], sigma^2 in
// [0.1,10]; gamma beta in [0.2,5], nu in [0.5,8]; finite theta in [-2,2]^m.
CoordVector random_eta_point(const Ctx& ctx, Rng& rng) {
  switch (ctx.family) {
    case Family::gaussian:
      return eta_of(GaussianParams{rng.uniform(-3.0, 3.0), rng.uniform(0.1, 10.0)});
    case Family::gamma:
      return eta_of(GammaParams{rng.uniform(0.2, 5.0), rng.uniform(0.5, 8.0)});
    case Family::finite: {
      std::vector<double> theta(ctx.model.dim);
      for (double& v : theta) v = rng.uniform(-2.0, 2.0);
      return eta_vec(ctx.model.eta_of_theta(theta));
    }
  }
  throw UnknownModelError("unreachable");
}

// Conservative interior box for finite-difference checks; the h = 1e-5
// truncation term grows too large against the 1e-7 bound near the edge of
// the full sampling box.
CoordVector random_eta_point_fd(const Ctx& ctx, Rng& rng) {
  switch (ctx.family) {
    case Family::gaussian:
      return eta_of(GaussianParams{rng.uniform(-3.0, 3.0), rng.uniform(0.5, 10.0)});
    case Family::gamma:
      return eta_of(GammaParams{rng.uniform(0.2, 3.0), rng.uniform(1.0, 8.0)});
    case Family::finite:
      return random_eta_point(ctx, rng);
  }
  throw UnknownModelError("unreachable");
}

// The JM parameter saturates at tau* = integral of n^2 dt along the decaying
// gradient flow; the conformal metric g/n^2 degenerates there. Geodesic
// spans are kept clear of that point (a probe flow estimates tau*).
double safe_tau_span(const Ctx& ctx, const CoordVector& eta0, double cap) {
  IntegratorConfig probe = ctx.cfg;
  probe.domain_guard = DomainGuard::truncate_trajectory;
  probe.step = std::max(probe.step, 1e-2);  // percent-level tau* estimate suffices
  const Trajectory traj = gradient_flow(ctx.model, eta0, {0.0, 5.0}, probe);
  return std::min(cap, 0.6 * traj.samples.back().tau);
}

// Span for the growing flows: at most cap, and never more than half the
// time to the domain exit (the finite-difference checks degrade rapidly as
// the blow-up approaches).
double safe_growth_span(const ModelDescriptor& m, std::span<const double> eta0, double cap) {
  auto inside = [&](double T) {
    std::vector<double> e(eta0.begin(), eta0.end());
    const double f = std::exp(T);
    for (double& v : e) v *= f;
    return m.in_domain(eta_vec(e));
  };
  if (inside(2.0 * cap)) return cap;
  double lo = 0.0, hi = 2.0 * cap;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return std::min(cap, 0.5 * lo);
}

// Several invariants are stated at the fixed-step rk4 grid (finite
// differences between neighbouring samples, index-aligned comparisons,
// shared grids of paired flows); they are evaluated on that grid whatever
// integrator the caller selected.
IntegratorConfig grid_cfg(const Ctx& ctx) {
  IntegratorConfig cfg = ctx.cfg;
  cfg.method = IntegratorMethod::rk4_fixed;
  cfg.step = std::min(cfg.step, 1e-3);
  return cfg;
}

// Step scaled to the span: tiny tau spans (small n^2 near a flow fixed
// point) would otherwise collapse onto one or two coarse steps.
IntegratorConfig span_cfg(const IntegratorConfig& base, double span) {
  IntegratorConfig cfg = base;
  cfg.step = std::min(cfg.step, std::max(span * 1e-3, 1e-12));
  return cfg;
}

CheckReport make_report(const Ctx& ctx, std::string id, double residual, double tol,
                        std::string details) {
  CheckReport r;
  r.check_id = std::move(id);
  r.model = ctx.label;
  r.residual = residual;
  r.tolerance = tol;
  r.pass = residual <= tol;
  r.details = std::move(details);
  return r;
}

// ---------------------------------------------------------------------------
// Individual checks.

CheckReport check_roundtrip(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "manifold.roundtrip");
  double worst = 0.0;
  const int count = 100;
  for (int k = 0; k < count; ++k) {
    const CoordVector eta = random_eta_point(ctx, rng);
    const CoordVector theta = coord_map(ctx.model, eta);
    const CoordVector back = coord_map(ctx.model, theta);
    worst = std::max(worst, max_abs_diff(back.values, eta.values));
  }
  return make_report(ctx, "manifold.roundtrip", worst, 1e-10, "100 seeded points, eta->theta->eta");
}

CheckReport check_metric_duality(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "manifold.metric_duality");
  double worst = 0.0;
  for (int k = 0; k < 100; ++k)
    worst = std::max(worst, metric_duality_residual(ctx.model, random_eta_point(ctx, rng)));
  return make_report(ctx, "manifold.metric_duality", worst, 1e-9, "100 seeded points");
}

CheckReport check_legendre(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "manifold.legendre");
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const CoordVector theta = coord_map(ctx.model, random_eta_point(ctx, rng));
    worst = std::max(worst, legendre_residual(ctx.model, theta));
  }
  return make_report(ctx, "manifold.legendre", worst, 1e-9, "100 seeded points");
}

CheckReport check_fd_gradient(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "manifold.fd_gradient");
  double worst = 0.0;
  for (int k = 0; k < 100; ++k)
    worst = std::max(worst, fd_gradient_check(ctx.model, random_eta_point_fd(ctx, rng), 1e-5));
  return make_report(ctx, "manifold.fd_gradient", worst, 1e-7,
                     "100 seeded points, h=1e-5, eta chart");
}

CheckReport check_fd_gradient_order(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "manifold.fd_gradient_order");
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const CoordVector x = random_eta_point_fd(ctx, rng);
    const double coarse = fd_gradient_check(ctx.model, x, 1e-2);
    const double fine = fd_gradient_check(ctx.model, x, 1e-4);
    if (fine == 0.0) continue;  // derivative exactly linear here
    const double ratio = coarse / fine;
    worst = std::max(worst, std::abs(std::log10(ratio) - 4.0));
  }
  return make_report(ctx, "manifold.fd_gradient_order", worst, 1.0,
                     "error ratio h=1e-2 vs h=1e-4, order-2 predicts 1e4");
}

CheckReport check_refractive_constancy(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "models.refractive_constancy");
  const double expected = 1.0 / std::sqrt(2.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k)
    worst = std::max(worst,
                     std::abs(refractive_index(ctx.model, random_eta_point(ctx, rng)) - expected));
  return make_report(ctx, "models.refractive_constancy", worst, 1e-12,
                     "n(eta) vs 1/sqrt(2) at 100 seeded points");
}

CheckReport check_refractive_nu_only(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "models.refractive_nu_only");
  double worst = 0.0;
  for (int k = 0; k < 30; ++k) {
    const double nu = rng.uniform(0.5, 8.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < 5; ++j) {
      const double beta = rng.uniform(0.2, 5.0);
      const double n = refractive_index(ctx.model, eta_of(GammaParams{beta, nu}));
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    worst = std::max(worst, hi - lo);
  }
  return make_report(ctx, "models.refractive_nu_only", worst, 1e-12,
                     "n spread across beta at 30 seeded nu values");
}

CheckReport check_n2_flow_speed(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "models.n2_flow_speed");
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const CoordVector eta = random_eta_point(ctx, rng);
    const std::vector<double> theta = ctx.model.theta_of_eta(eta.values);
    const MetricMatrix lower = ctx.model.metric_lower_eta(eta.values);
    const MetricMatrix upper = ctx.model.metric_upper_theta(theta);
    const std::vector<double> etadot = mat_vec(lower, theta);  // minus the flow rhs
    const double speed2 = quad_form(upper, etadot, etadot);
    const double n2 = n2_eta(ctx.model, eta.values);
    worst = std::max(worst, std::abs(speed2 - n2) / std::max(1.0, std::abs(n2)));
  }
  return make_report(ctx, "models.n2_flow_speed", worst, 1e-9,
                     "n^2 vs g^ij (deta/dt)_i (deta/dt)_j at 100 seeded points");
}

CheckReport check_finite_metric_covariance(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "models.finite_metric_covariance");
  const FiniteExpFamily& fam = *ctx.model.finite_family;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    std::vector<double> theta(fam.dim);
    for (double& v : theta) v = rng.uniform(-2.0, 2.0);
    const MetricMatrix g = fam.covariance(theta);
    // Independent route: E[F F^T] - eta eta^T by direct summation.
    const std::vector<double> p = fam.probabilities(theta);
    std::vector<double> eta(fam.dim, 0.0);
    for (int x = 0; x < fam.alphabet_size; ++x)
      for (int i = 0; i < fam.dim; ++i) eta[i] += p[x] * fam.stats[x][i];
    for (int i = 0; i < fam.dim; ++i)
      for (int j = 0; j < fam.dim; ++j) {
        double second = 0.0;
        for (int x = 0; x < fam.alphabet_size; ++x)
          second += p[x] * fam.stats[x][i] * fam.stats[x][j];
        worst = std::max(worst, std::abs(g(i, j) - (second - eta[i] * eta[j])));
      }
  }
  return make_report(ctx, "models.finite_metric_covariance", worst, 1e-12,
                     "covariance vs direct second-moment sums, 50 seeded thetas");
}

CheckReport check_linearization_eta(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "dynamics.linearization_eta");
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const CoordVector eta0 = random_eta_point(ctx, rng);
    const Trajectory traj = gradient_flow(ctx.model, eta0, {0.0, 2.0}, ctx.cfg);
    const std::vector<double>& th0 = traj.samples.front().theta;
    for (const FlowSample& smp : traj.samples) {
      const double f = std::exp(-smp.t);
      for (int i = 0; i < traj.dim; ++i)
        worst = std::max(worst, std::abs(smp.theta[i] - th0[i] * f));
    }
  }
  return make_report(ctx, "dynamics.linearization_eta", worst, 1e-6,
                     "theta(t) vs theta(0) e^{-t} along 5 seeded eta-chart flows, t in [0,2]");
}

CheckReport check_linearization_theta(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "dynamics.linearization_theta");
  double worst = 0.0;
  int accepted = 0;
  int guard = 0;
  while (accepted < 5 && ++guard < 200) {
    const CoordVector eta0 = random_eta_point(ctx, rng);
    const double span = safe_growth_span(ctx.model, eta0.values, 2.0);
    if (span < 0.2) continue;
    ++accepted;
    const CoordVector theta0 = coord_map(ctx.model, eta0);
    const Trajectory traj = gradient_flow(ctx.model, theta0, {0.0, span}, ctx.cfg);
    const std::vector<double>& e0 = traj.samples.front().eta;
    for (const FlowSample& smp : traj.samples) {
      const double f = std::exp(smp.t);
      for (int i = 0; i < traj.dim; ++i)
        worst = std::max(worst, std::abs(smp.eta[i] - e0[i] * f));
    }
  }
  return make_report(ctx, "dynamics.linearization_theta", worst, 1e-6,
                     "eta(t) vs eta(0) e^{t} along 5 seeded theta-chart flows");
}

CheckReport check_geodesic_conservation(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "dynamics.geodesic_conservation");
  const HamiltonianSpec spec = geodesic_eta_spec(ctx.model_ptr);
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const CoordVector eta0 = random_eta_point(ctx, rng);
    const PhaseState st0 = consistent_state(ctx.model, eta0);
    const double span = safe_tau_span(ctx, eta0, 1.0);
    const Trajectory traj = geodesic_flow(spec, st0, {0.0, span}, span_cfg(ctx.cfg, span));
    const double h0 = geodesic_hamiltonian(spec, {traj.samples.front().eta,
                                                  traj.samples.front().theta});
    for (const FlowSample& smp : traj.samples) {
      const double h = geodesic_hamiltonian(spec, {smp.eta, smp.theta});
      worst = std::max(worst, std::abs(h - h0) / std::abs(h0));
    }
  }
  return make_report(ctx, "dynamics.geodesic_conservation", worst, 1e-8,
                     "relative H drift along 3 seeded geodesic flows, tau spans up to 1");
}

CheckReport check_rate_law(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "dynamics.rate_law");
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const CoordVector eta0 = random_eta_point(ctx, rng);
    const Trajectory traj = gradient_flow(ctx.model, eta0, {0.0, 1.0}, grid_cfg(ctx));
    std::vector<double> psi(traj.samples.size());
    for (std::size_t j = 0; j < traj.samples.size(); ++j)
      psi[j] = ctx.model.psi_star(traj.samples[j].eta);
    // fourth-order stencil keeps the truncation term below the bound across
    // the whole sampling box
    for (std::size_t j = 2; j + 2 < traj.samples.size(); ++j) {
      const double h = traj.samples[j + 1].t - traj.samples[j].t;
      bool uniform = true;
      for (std::size_t i = j - 2; i < j + 2; ++i)
        uniform = uniform &&
                  std::abs((traj.samples[i + 1].t - traj.samples[i].t) - h) < 1e-12;
      if (!uniform) continue;
      const double dpsi =
          (-psi[j + 2] + 8.0 * psi[j + 1] - 8.0 * psi[j - 1] + psi[j - 2]) / (12.0 * h);
      worst = std::max(worst, std::abs(dpsi + n2_eta(ctx.model, traj.samples[j].eta)));
    }
  }
  return make_report(ctx, "dynamics.rate_law", worst, 1e-6,
                     "|dPsi*/dt + n^2| along 3 seeded eta-chart flows");
}

CheckReport check_path_equivalence(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "dynamics.path_equivalence");
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    const CoordVector eta0 = random_eta_point(ctx, rng);
    const PhaseState st0 = consistent_state(ctx.model, eta0);
    const double span = safe_tau_span(ctx, eta0, 1.0);
    const Trajectory geo = geodesic_flow(geodesic_eta_spec(ctx.model_ptr), st0, {0.0, span},
                                         span_cfg(grid_cfg(ctx), span));
    const double t_end = geo.samples.back().t;
    const Trajectory nat = natural_flow_t(natural_ig_spec(ctx.model_ptr), st0, {0.0, t_end},
                                          span_cfg(grid_cfg(ctx), t_end));
    const double tau_end = std::min(geo.samples.back().tau, nat.samples.back().tau);
    std::vector<double> grid(200);
    for (std::size_t j = 0; j < grid.size(); ++j)
      grid[j] = tau_end * static_cast<double>(j) / static_cast<double>(grid.size() - 1);
    const std::vector<FlowSample> a = sample_at(geo, FlowParam::tau, grid);
    const std::vector<FlowSample> b = sample_at(nat, FlowParam::tau, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      worst = std::max(worst, max_abs_diff(a[j].eta, b[j].eta));
      worst = std::max(worst, max_abs_diff(a[j].theta, b[j].theta));
    }
  }
  return make_report(ctx, "dynamics.path_equivalence", worst, 1e-6,
                     "geodesic (tau) vs natural (t) flow states on a shared tau grid");
}

CheckReport check_dual_consistency(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "dynamics.dual_consistency");
  double worst = 0.0;
  double integrator_tol = 1e-9;
  for (int k = 0; k < 2; ++k) {
    const CoordVector eta0 = random_eta_point(ctx, rng);
    const PhaseState st0 = consistent_state(ctx.model, eta0);
    const double span = safe_tau_span(ctx, eta0, 1.0);
    const Trajectory geo = geodesic_flow(geodesic_eta_spec(ctx.model_ptr), st0, {0.0, span},
                                         span_cfg(ctx.cfg, span));
    if (ctx.cfg.method == IntegratorMethod::rkf45_adaptive) {
      // per-step tolerance accumulates over accepted steps
      integrator_tol = std::max(integrator_tol,
                                ctx.cfg.abs_tol * static_cast<double>(geo.samples.size()));
    }
    for (const FlowSample& smp : geo.samples)
      worst = std::max(worst, max_abs_diff(ctx.model.eta_of_theta(smp.theta), smp.eta));
  }
  return make_report(ctx, "dynamics.dual_consistency", worst, 10.0 * integrator_tol,
                     "|eta(theta) - eta| along 2 seeded geodesic flows");
}

CheckReport check_integrability(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "dynamics.integrability");
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> th0(ctx.model.dim), et0(ctx.model.dim);
    for (double& v : th0) v = rng.uniform(-2.0, 2.0);
    for (double& v : et0) v = rng.uniform(-2.0, 2.0);
    const Trajectory a = linear_flow(theta_vec(th0), {0.0, 5.0}, grid_cfg(ctx));
    const Trajectory b = linear_flow(eta_vec(et0), {0.0, 5.0}, grid_cfg(ctx));
    const std::vector<std::vector<double>> c = integrability_products(a, b);
    for (const std::vector<double>& row : c)
      worst = std::max(worst, max_abs_diff(row, c.front()));
  }
  return make_report(ctx, "dynamics.integrability", worst, 1e-9,
                     "theta^i eta_i drift along 3 seeded paired linear flows, t in [0,5]");
}

CheckReport check_time_map_eta(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "models.time_map_eta");
  const CoordVector eta0 = random_eta_point(ctx, rng);
  const Trajectory traj = gradient_flow(ctx.model, eta0, {0.0, 1.0}, ctx.cfg);
  CheckReport r = time_map_check(ctx.label, traj);
  r.model = ctx.label;
  return r;
}

CheckReport check_time_map_theta(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "models.time_map_theta");
  // mu bounded away from 0: the theta-side map degenerates there.
  CoordVector eta0;
  double span = 0.0;
  int guard = 0;
  do {
    eta0 = eta_of(GaussianParams{rng.uniform(0.3, 3.0), rng.uniform(0.5, 10.0)});
    span = safe_growth_span(ctx.model, eta0.values, 1.0);
  } while (span < 0.2 && ++guard < 100);
  const CoordVector theta0 = coord_map(ctx.model, eta0);
  const Trajectory traj = gradient_flow(ctx.model, theta0, {0.0, span}, ctx.cfg);
  CheckReport r = time_map_check(ctx.label, traj);
  r.model = ctx.label;
  return r;
}

CheckReport check_second_set(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "verify.second_set");
  CoordVector eta0;
  double span = 0.0;
  int guard = 0;
  do {
    eta0 = eta_of(GaussianParams{rng.uniform(0.3, 3.0), rng.uniform(0.5, 10.0)});
    span = safe_growth_span(ctx.model, eta0.values, 1.0);
  } while (span < 0.2 && ++guard < 100);
  const CoordVector theta0 = coord_map(ctx.model, eta0);
  const Trajectory traj = gradient_flow(ctx.model, theta0, {0.0, span}, grid_cfg(ctx));
  CheckReport r = second_set_gaussian_check(traj);
  r.model = ctx.label;
  return r;
}

CheckReport check_replicator_simplex(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "replicator.simplex");
  const FiniteExpFamily& fam = *ctx.model.finite_family;
  double worst_sum = 0.0;
  double worst_neg = 0.0;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> th0(fam.dim);
    for (double& v : th0) v = rng.uniform(-2.0, 2.0);
    const ReplicatorRun run = simulate_replicator(fam, th0, {0.0, 5.0}, ctx.cfg);
    for (const ProbabilityVector& p : run.p_direct) {
      double sum = 0.0;
      for (double v : p.probs) {
        sum += v;
        worst_neg = std::max(worst_neg, std::max(0.0, -v));
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
  }
  // encode both bounds in one residual: |sum p - 1| <= 1e-9 and p >= -1e-12
  const double residual = std::max(worst_sum, worst_neg * 1e3);
  return make_report(ctx, "replicator.simplex", residual, 1e-9,
                     "3 seeded runs, t in [0,5]: max |sum p - 1| = " + format_shortest(worst_sum) +
                         ", worst negativity = " + format_shortest(worst_neg));
}

CheckReport check_replicator_two_route(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "replicator.two_route");
  const FiniteExpFamily& fam = *ctx.model.finite_family;
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> th0(fam.dim);
    for (double& v : th0) v = rng.uniform(-2.0, 2.0);
    const ReplicatorRun run = simulate_replicator(fam, th0, {0.0, 3.0}, ctx.cfg);
    worst = std::max(worst, run.max_route_difference);
  }
  return make_report(ctx, "replicator.two_route", worst, 1e-7,
                     "direct simplex integration vs p_{theta0 e^{-t}}, 3 seeded runs");
}

CheckReport check_replicator_equivalence(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "replicator.equivalence");
  const FiniteExpFamily& fam = *ctx.model.finite_family;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> th(fam.dim);
    for (double& v : th) v = rng.uniform(-2.0, 2.0);
    worst = std::max(worst, equivalence_residual(fam, th));
  }
  return make_report(ctx, "replicator.equivalence", worst, 1e-12, "100 seeded theta draws");
}

CheckReport check_optics_bridge(const Ctx& ctx) {
  Rng rng = check_rng(ctx, "optics.bridge");
  const auto field = std::make_shared<const RefractiveField>(field_from_model(ctx.model_ptr));
  const PhaseState st0 = consistent_state(ctx.model, random_eta_point(ctx, rng));
  std::vector<double> p0(st0.theta.size());
  for (std::size_t i = 0; i < p0.size(); ++i) p0[i] = -st0.theta[i];
  const RayTrajectory ray =
      ray_trace(*field, {st0.eta, p0}, FlowParam::t, {0.0, 0.5}, grid_cfg(ctx));
  const Trajectory nat =
      natural_flow_t(natural_ig_spec(ctx.model_ptr), st0, {0.0, 0.5}, grid_cfg(ctx));
  double worst = 0.0;
  const std::size_t count = std::min(ray.samples.size(), nat.samples.size());
  for (std::size_t k = 0; k < count; ++k) {
    worst = std::max(worst, max_abs_diff(ray.samples[k].q, nat.samples[k].eta));
    for (int i = 0; i < ctx.model.dim; ++i)
      worst = std::max(worst,
                       std::abs(ray.samples[k].p[i] + nat.samples[k].theta[i]));
  }
  return make_report(ctx, "optics.bridge", worst, 1e-6,
                     "ray with q=eta, p=-theta vs natural flow over t in [0,0.5]");
}

}  // namespace

std::vector<CheckReport> run_suite(const ModelDescriptor& model, const std::string& label,
                                   std::uint64_t seed, const IntegratorConfig& cfg) {
  Ctx ctx{model, std::make_shared<const ModelDescriptor>(model), label, seed, cfg,
          family_of(model)};

  std::vector<std::pair<std::string, std::function<CheckReport(const Ctx&)>>> checks = {
      {"manifold.roundtrip", check_roundtrip},
      {"manifold.metric_duality", check_metric_duality},
      {"manifold.legendre", check_legendre},
      {"manifold.fd_gradient", check_fd_gradient},
      {"manifold.fd_gradient_order", check_fd_gradient_order},
      {"models.n2_flow_speed", check_n2_flow_speed},
      {"dynamics.linearization_eta", check_linearization_eta},
      {"dynamics.linearization_theta", check_linearization_theta},
      {"dynamics.geodesic_conservation", check_geodesic_conservation},
      {"dynamics.rate_law", check_rate_law},
      {"dynamics.path_equivalence", check_path_equivalence},
      {"dynamics.dual_consistency", check_dual_consistency},
      {"dynamics.integrability", check_integrability},
  };
  if (ctx.family == Family::gaussian) {
    checks.emplace_back("models.refractive_constancy", check_refractive_constancy);
    checks.emplace_back("models.time_map_eta", check_time_map_eta);
    checks.emplace_back("models.time_map_theta", check_time_map_theta);
    checks.emplace_back("verify.second_set", check_second_set);
    checks.emplace_back("optics.bridge", check_optics_bridge);
  }
  if (ctx.family == Family::gamma) {
    checks.emplace_back("models.refractive_nu_only", check_refractive_nu_only);
    checks.emplace_back("models.time_map_eta", check_time_map_eta);
    checks.emplace_back("optics.bridge", check_optics_bridge);
  }
  if (ctx.family == Family::finite) {
    checks.emplace_back("models.finite_metric_covariance", check_finite_metric_covariance);
    checks.emplace_back("replicator.simplex", check_replicator_simplex);
    checks.emplace_back("replicator.two_route", check_replicator_two_route);
    checks.emplace_back("replicator.equivalence", check_replicator_equivalence);
  }

  std::sort(checks.begin(), checks.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<CheckReport> reports;
  reports.reserve(checks.size());
  for (const auto& [id, fn] : checks) {
    try {
      reports.push_back(fn(ctx));
    } catch (const std::exception& e) {
      CheckReport r;
      r.check_id = id;
      r.model = label;
      r.residual = std::numeric_limits<double>::max();  // JSON cannot carry inf
      r.tolerance = 0.0;
      r.pass = false;
      r.details = std::string("check aborted: ") + e.what();
      reports.push_back(std::move(r));
    }
  }
  std::stable_sort(reports.begin(), reports.end(),
                   [](const CheckReport& a, const CheckReport& b) {
                     return a.check_id < b.check_id;
                   });
  return reports;
}

std::vector<CheckReport> run_suite(const std::string& model_id, std::uint64_t seed,
                                   const IntegratorConfig& cfg) {
  const ModelDescriptor model = model_by_id(model_id);
  return run_suite(model, model_id, seed, cfg);
}

CheckReport time_map_check(const std::string& model_id, const Trajectory& traj) {
  if (traj.driver.model != model_id &&
      model_id.rfind(traj.driver.model, 0) != 0)
    throw ModelMismatchError("time_map_check: trajectory was produced by model '" +
                             traj.driver.model + "', not '" + model_id + "'");
  if (traj.samples.size() < 2)
    throw TooFewSamplesError("time_map_check: need at least 2 samples");

  const bool is_gaussian = traj.driver.model.rfind("gaussian", 0) == 0;
  const bool is_gamma = traj.driver.model.rfind("gamma", 0) == 0;
  std::function<double(const FlowSample&)> map_const;
  std::string what;
  if (is_gaussian && traj.driver.kind == "gradient_eta") {
    map_const = [](const FlowSample& s) {
      return s.t - std::log(s.eta[1] - s.eta[0] * s.eta[0]);
    };
    what = "t - ln sigma^2";
  } else if (is_gamma && traj.driver.kind == "gradient_eta") {
    map_const = [](const FlowSample& s) { return s.t + std::log(-s.theta[0]); };
    what = "t + ln beta";
  } else if (is_gaussian && traj.driver.kind == "gradient_theta") {
    if (std::abs(traj.samples.front().eta[0]) < 1e-12)
      throw ModelMismatchError("time_map_check: dt = d ln mu is degenerate at mu = 0");
    map_const = [](const FlowSample& s) { return s.t - std::log(std::abs(s.eta[0])); };
    what = "t - ln mu";
  } else {
    throw ModelMismatchError("time_map_check: no closed-form dt relation for driver '" +
                             traj.driver.kind + "' of model '" + traj.driver.model + "'");
  }

  const double c0 = map_const(traj.samples.front());
  double worst = 0.0;
  for (const FlowSample& smp : traj.samples)
    worst = std::max(worst, std::abs(map_const(smp) - c0));

  CheckReport r;
  r.check_id = "verify.time_map." + traj.driver.kind;
  r.model = model_id;
  r.residual = worst;
  r.tolerance = 1e-7;
  r.pass = worst <= r.tolerance;
  r.details = what + " constant along the flow";
  return r;
}

CheckReport second_set_gaussian_check(const Trajectory& traj) {
  if (traj.driver.kind != "gradient_theta" || traj.driver.model.rfind("gaussian", 0) != 0)
    throw ModelMismatchError(
        "second_set_gaussian_check expects a gaussian theta-chart gradient flow");
  if (traj.samples.size() < 3)
    throw TooFewSamplesError("second_set_gaussian_check: need at least 3 samples");
  const double mu0 = traj.samples.front().eta[0];
  if (std::abs(mu0) < 1e-12)
    throw ModelMismatchError("second_set_gaussian_check: dt = d ln mu is degenerate at mu = 0");

  const FlowSample& first = traj.samples.front();
  double growth = 0.0;
  for (const FlowSample& smp : traj.samples) {
    const double f = std::exp(smp.t - first.t);
    for (std::size_t i = 0; i < smp.eta.size(); ++i)
      growth = std::max(growth, std::abs(smp.eta[i] - first.eta[i] * f));
  }

  // Finite-difference rates of ln sigma and ln mu. A fourth-order stencil on
  // the uniform part of the grid keeps truncation far below the bound; the
  // two-point midpoint form covers very short trajectories.
  const std::size_t count = traj.samples.size();
  std::vector<double> lns(count), lnmu(count), factor(count);
  for (std::size_t k = 0; k < count; ++k) {
    const FlowSample& smp = traj.samples[k];
    const double s2 = smp.eta[1] - smp.eta[0] * smp.eta[0];
    lns[k] = 0.5 * std::log(s2);
    lnmu[k] = std::log(std::abs(smp.eta[0]));
    factor[k] = 0.5 * (1.0 - smp.eta[0] * smp.eta[0] / s2);
  }
  double fd = 0.0;
  if (count >= 5) {
    for (std::size_t k = 2; k + 2 < count; ++k) {
      const double h = traj.samples[k + 1].t - traj.samples[k].t;
      bool uniform = true;
      for (std::size_t j = k - 2; j < k + 2; ++j)
        uniform = uniform &&
                  std::abs((traj.samples[j + 1].t - traj.samples[j].t) - h) < 1e-12;
      if (!uniform) continue;  // skip the clipped tail interval
      const double dlns =
          (-lns[k + 2] + 8.0 * lns[k + 1] - 8.0 * lns[k - 1] + lns[k - 2]) / (12.0 * h);
      const double dlnmu =
          (-lnmu[k + 2] + 8.0 * lnmu[k + 1] - 8.0 * lnmu[k - 1] + lnmu[k - 2]) / (12.0 * h);
      fd = std::max(fd, std::abs(dlns - factor[k] * dlnmu));
    }
  } else {
    for (std::size_t k = 0; k + 1 < count; ++k) {
      const double dlns = lns[k + 1] - lns[k];
      const double dlnmu = lnmu[k + 1] - lnmu[k];
      const double mid_factor = 0.5 * (factor[k] + factor[k + 1]);
      fd = std::max(fd, std::abs(dlns - mid_factor * dlnmu) / (traj.samples[k + 1].t -
                                                               traj.samples[k].t));
    }
  }

  CheckReport r;
  r.check_id = "verify.second_set";
  r.model = traj.driver.model;
  r.residual = std::max(growth, fd);
  r.tolerance = 1e-5;
  r.pass = r.residual <= r.tolerance;
  r.details = "eta growth law and d sigma/sigma relation (growth " + format_shortest(growth) +
              ", fd " + format_shortest(fd) + ")";
  return r;
}

void write_reports_jsonl(std::ostream& os, const std::vector<CheckReport>& reports) {
  for (const CheckReport& r : reports) {
    nlohmann::ordered_json j;
    j["check_id"] = r.check_id;
    j["model"] = r.model;
    j["residual"] = r.residual;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["details"] = r.details;
    os << j.dump() << "\n";
  }
}

bool all_pass(const std::vector<CheckReport>& reports) {
  for (const CheckReport& r : reports)
    if (!r.pass) return false;
  return true;
}

}  // namespace igflow
