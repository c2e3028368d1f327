#include "igflow/replicator.hpp"

#include <cmath>

#include "igflow/util.hpp"

namespace igflow {

void validate_probability(const ProbabilityVector& p, double slack) {
  double sum = 0.0;
  for (double v : p.probs) {
    if (!std::isfinite(v)) throw NonFiniteError("probability vector has non-finite entries");
    if (v < -slack) throw DomainError("probability vector has a negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw DomainError("probability vector does not sum to one");
}

namespace {

std::vector<double> replicator_rhs_of_p(const std::vector<double>& p) {
  const std::size_t k = p.size();
  double mean_log = 0.0;
  std::vector<double> logs(k);
  for (std::size_t x = 0; x < k; ++x) {
    logs[x] = std::log(p[x]);
    mean_log += p[x] * logs[x];
  }
  std::vector<double> out(k);
  for (std::size_t x = 0; x < k; ++x) out[x] = -p[x] * (logs[x] - mean_log);
  return out;
}

}  // namespace

std::vector<double> replicator_rhs(const FiniteExpFamily& family,
                                   std::span<const double> theta) {
  if (!all_finite(theta)) throw NonFiniteError("replicator_rhs: non-finite theta");
  return replicator_rhs_of_p(family.probabilities(theta));
}

double equivalence_residual(const FiniteExpFamily& family, std::span<const double> theta) {
  if (!all_finite(theta)) throw NonFiniteError("equivalence_residual: non-finite theta");
  const std::vector<double> p = family.probabilities(theta);
  const std::vector<double> eta = family.mean_stats(theta);
  const std::vector<double> rhs = replicator_rhs_of_p(p);
  double worst = 0.0;
  for (int x = 0; x < family.alphabet_size; ++x) {
    // chain rule dp/dt = (d theta^k/dt)(F_k - eta_k) p with d theta/dt = -theta
    double chain = 0.0;
    for (int k = 0; k < family.dim; ++k)
      chain += -theta[k] * (family.stats[x][k] - eta[k]);
    chain *= p[x];
    worst = std::max(worst, std::abs(chain - rhs[x]));
  }
  return worst;
}

ReplicatorRun simulate_replicator(const FiniteExpFamily& family, std::span<const double> theta0,
                                  std::pair<double, double> t_span, const IntegratorConfig& cfg) {
  if (static_cast<int>(theta0.size()) != family.dim)
    throw ConfigError("simulate_replicator: theta0 has the wrong dimension");
  if (!all_finite(theta0)) throw NonFiniteError("simulate_replicator: non-finite theta0");
  if (!(t_span.second >= t_span.first)) throw ConfigError("span must satisfy end >= start");
  if (!(cfg.step > 0.0)) throw ConfigError("integrator step must be positive");

  // Fixed uniform grid; the direct route renormalizes after every step.
  std::vector<double> grid{t_span.first};
  {
    long i = 0;
    while (grid.back() < t_span.second) {
      if (++i > cfg.max_steps) throw StepLimitError("simulate_replicator: exceeded max_steps");
      double next = t_span.first + static_cast<double>(i) * cfg.step;
      if (next > t_span.second - 0.25 * cfg.step) next = t_span.second;
      grid.push_back(next);
    }
  }

  ReplicatorRun run;
  run.t = grid;
  const int k = family.alphabet_size;

  std::vector<double> p(family.probabilities(theta0));
  std::vector<double> k1(k), k2(k), k3(k), k4(k), tmp(k);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const double t = grid[idx];
    std::vector<double> th(theta0.size());
    const double decay = std::exp(-(t - t_span.first));
    for (std::size_t j = 0; j < th.size(); ++j) th[j] = theta0[j] * decay;

    run.theta.push_back(th);
    run.p_from_theta.push_back({family.probabilities(th)});
    run.p_direct.push_back({p});
    run.max_route_difference = std::max(
        run.max_route_difference,
        max_abs_diff(run.p_from_theta.back().probs, run.p_direct.back().probs));

    if (idx + 1 == grid.size()) break;
    const double h = grid[idx + 1] - grid[idx];
    k1 = replicator_rhs_of_p(p);
    for (int x = 0; x < k; ++x) tmp[x] = p[x] + 0.5 * h * k1[x];
    k2 = replicator_rhs_of_p(tmp);
    for (int x = 0; x < k; ++x) tmp[x] = p[x] + 0.5 * h * k2[x];
    k3 = replicator_rhs_of_p(tmp);
    for (int x = 0; x < k; ++x) tmp[x] = p[x] + h * k3[x];
    k4 = replicator_rhs_of_p(tmp);
    double sum = 0.0;
    for (int x = 0; x < k; ++x) {
      p[x] += (h / 6.0) * (k1[x] + 2.0 * (k2[x] + k3[x]) + k4[x]);
      sum += p[x];
    }
    run.max_renormalization = std::max(run.max_renormalization, std::abs(sum - 1.0));
    for (int x = 0; x < k; ++x) p[x] /= sum;
    if (!all_finite(p)) throw NonFiniteError("replicator integration became non-finite");
  }

  // The theta decay is the linearized eta-chart gradient flow of the family,
  // so the usual (t, s, tau) columns apply with n from the family metric.
  Trajectory& traj = run.ig_trajectory;
  traj.driver = {"replicator", "finite", 0.0};
  traj.config = cfg;
  traj.dim = family.dim;
  std::vector<double> nvals(grid.size()), n2vals(grid.size());
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const std::vector<double>& th = run.theta[idx];
    const double n2 = quad_form(family.covariance(th), th, th);
    n2vals[idx] = n2;
    nvals[idx] = std::sqrt(std::max(n2, 0.0));
  }
  double s_acc = 0.0, tau_acc = 0.0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (idx > 0) {
      const double h = grid[idx] - grid[idx - 1];
      s_acc += 0.5 * (nvals[idx - 1] + nvals[idx]) * h;
      tau_acc += 0.5 * (n2vals[idx - 1] + n2vals[idx]) * h;
    }
    FlowSample smp;
    smp.t = grid[idx];
    smp.s = s_acc;
    smp.tau = tau_acc;
    smp.theta = run.theta[idx];
    smp.eta = family.mean_stats(run.theta[idx]);
    traj.samples.push_back(std::move(smp));
  }
  return run;
}

}  // namespace igflow
