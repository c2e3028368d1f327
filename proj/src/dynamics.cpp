#include "igflow/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "igflow/interp.hpp"
#include "igflow/optics.hpp"
#include "igflow/util.hpp"

namespace igflow {

const char* flow_param_name(FlowParam p) {
  switch (p) {
    case FlowParam::t: return "t";
    case FlowParam::s: return "s";
    case FlowParam::tau: return "tau";
  }
  return "?";
}

const char* hamiltonian_kind_name(HamiltonianKind k) {
  switch (k) {
    case HamiltonianKind::geodesic_eta: return "geodesic_eta";
    case HamiltonianKind::geodesic_theta: return "geodesic_theta";
    case HamiltonianKind::natural_ig: return "natural_ig";
    case HamiltonianKind::natural_optics: return "natural_optics";
    case HamiltonianKind::geodesic_optics: return "geodesic_optics";
  }
  return "?";
}

double param_value(const FlowSample& s, FlowParam p) {
  switch (p) {
    case FlowParam::t: return s.t;
    case FlowParam::s: return s.s;
    case FlowParam::tau: return s.tau;
  }
  return 0.0;
}

HamiltonianSpec geodesic_eta_spec(std::shared_ptr<const ModelDescriptor> model) {
  HamiltonianSpec spec;
  spec.kind = HamiltonianKind::geodesic_eta;
  spec.model = std::move(model);
  return spec;
}

HamiltonianSpec geodesic_theta_spec(std::shared_ptr<const ModelDescriptor> model) {
  HamiltonianSpec spec;
  spec.kind = HamiltonianKind::geodesic_theta;
  spec.model = std::move(model);
  return spec;
}

HamiltonianSpec natural_ig_spec(std::shared_ptr<const ModelDescriptor> model, double energy) {
  HamiltonianSpec spec;
  spec.kind = HamiltonianKind::natural_ig;
  spec.model = std::move(model);
  spec.energy = energy;
  return spec;
}

PhaseState consistent_state(const ModelDescriptor& m, const CoordVector& x0) {
  const CoordVector dual = coord_map(m, x0);
  if (x0.chart == Chart::eta) return {x0.values, dual.values};
  return {dual.values, x0.values};
}

namespace {

const ModelDescriptor& require_model(const HamiltonianSpec& spec) {
  if (!spec.model) throw ConfigError("hamiltonian spec has no model attached");
  return *spec.model;
}

void check_phase_dim(const ModelDescriptor& m, const PhaseState& st) {
  if (static_cast<int>(st.eta.size()) != m.dim || static_cast<int>(st.theta.size()) != m.dim)
    throw ConfigError("phase state dimension does not match the model");
}

}  // namespace

// ---------------------------------------------------------------------------
// Gradient flows.

Trajectory gradient_flow(const ModelDescriptor& m, const CoordVector& x0,
                         std::pair<double, double> t_span, const IntegratorConfig& cfg) {
  require_in_domain(m, x0);
  const int dim = m.dim;
  const Chart chart = x0.chart;

  OdeRhs rhs = [&m, dim, chart](double, const std::vector<double>& y, std::vector<double>& dy) {
    const std::span<const double> x(y.data(), static_cast<std::size_t>(dim));
    if (!m.in_domain({chart, std::vector<double>(x.begin(), x.end())}))
      throw DomainError("gradient flow left the model domain");
    double n2;
    if (chart == Chart::eta) {
      const std::vector<double> theta = m.theta_of_eta(x);
      const MetricMatrix g = m.metric_lower_eta(x);
      const std::vector<double> gth = mat_vec(g, theta);
      for (int i = 0; i < dim; ++i) dy[i] = -gth[i];
      n2 = quad_form(g, theta, theta);
    } else {
      const std::vector<double> eta = m.eta_of_theta(x);
      const MetricMatrix g = m.metric_upper_theta(x);
      const std::vector<double> ge = mat_vec(g, eta);
      for (int i = 0; i < dim; ++i) dy[i] = ge[i];
      n2 = quad_form(g, eta, eta);
    }
    // n^2 vanishes exactly at fixed points of the flow; clamp roundoff.
    n2 = std::max(n2, 0.0);
    dy[dim] = std::sqrt(n2);  // ds/dt = n
    dy[dim + 1] = n2;         // dtau/dt = n^2
  };

  std::vector<double> y0(x0.values);
  y0.push_back(0.0);
  y0.push_back(0.0);
  const OdeResult ode = integrate_ode(rhs, std::move(y0), t_span, cfg);

  Trajectory traj;
  traj.driver = {chart == Chart::eta ? "gradient_eta" : "gradient_theta", m.id, 0.0};
  traj.config = cfg;
  traj.status = ode.status;
  traj.dim = dim;
  traj.samples.reserve(ode.u.size());
  for (std::size_t k = 0; k < ode.u.size(); ++k) {
    FlowSample smp;
    smp.t = ode.u[k];
    smp.s = ode.y[k][dim];
    smp.tau = ode.y[k][dim + 1];
    std::vector<double> x(ode.y[k].begin(), ode.y[k].begin() + dim);
    if (chart == Chart::eta) {
      smp.theta = m.theta_of_eta(x);
      smp.eta = std::move(x);
    } else {
      smp.eta = m.eta_of_theta(x);
      smp.theta = std::move(x);
    }
    traj.samples.push_back(std::move(smp));
  }
  return traj;
}

CoordVector linear_flow_closed_form(const CoordVector& x0, double t) {
  const double factor = (x0.chart == Chart::theta) ? std::exp(-t) : std::exp(t);
  CoordVector out = x0;
  for (double& v : out.values) v *= factor;
  return out;
}

Trajectory linear_flow(const CoordVector& x0, std::pair<double, double> t_span,
                       const IntegratorConfig& cfg) {
  if (!all_finite(x0.values)) throw NonFiniteError("linear flow: non-finite start");
  const int dim = static_cast<int>(x0.values.size());
  const double rate = (x0.chart == Chart::theta) ? -1.0 : 1.0;
  OdeRhs rhs = [rate, dim](double, const std::vector<double>& y, std::vector<double>& dy) {
    for (int i = 0; i < dim; ++i) dy[i] = rate * y[i];
  };
  const OdeResult ode = integrate_ode(rhs, x0.values, t_span, cfg);

  Trajectory traj;
  traj.driver = {x0.chart == Chart::theta ? "linear_theta" : "linear_eta", "", 0.0};
  traj.config = cfg;
  traj.status = ode.status;
  traj.dim = dim;
  for (std::size_t k = 0; k < ode.u.size(); ++k) {
    FlowSample smp;
    smp.t = smp.s = smp.tau = ode.u[k];
    if (x0.chart == Chart::theta) smp.theta = ode.y[k];
    else smp.eta = ode.y[k];
    traj.samples.push_back(std::move(smp));
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Geodesic and natural Hamiltonian flows.

namespace {

struct PhaseFlowSetup {
  std::string kind_name;
  // dy for [eta(dim), theta(dim), extra1, extra2]
  OdeRhs rhs;
};

// Shared state layout: y = [eta, theta, a, b] where (a, b) are the two
// non-primary time parameters.
Trajectory run_phase_flow(const ModelDescriptor& m, const HamiltonianSpec& spec,
                          const PhaseState& st0, std::pair<double, double> span,
                          const IntegratorConfig& cfg, const OdeRhs& rhs,
                          const std::string& kind_name, FlowParam primary) {
  check_phase_dim(m, st0);
  if (!m.in_domain(eta_vec(st0.eta)))
    throw DomainError("initial eta is outside the domain of model '" + m.id + "'");
  const int dim = m.dim;
  std::vector<double> y0;
  y0.insert(y0.end(), st0.eta.begin(), st0.eta.end());
  y0.insert(y0.end(), st0.theta.begin(), st0.theta.end());
  y0.push_back(0.0);
  y0.push_back(0.0);
  const OdeResult ode = integrate_ode(rhs, std::move(y0), span, cfg);

  Trajectory traj;
  traj.driver = {kind_name, m.id, spec.energy};
  traj.config = cfg;
  traj.status = ode.status;
  traj.dim = dim;
  for (std::size_t k = 0; k < ode.u.size(); ++k) {
    FlowSample smp;
    const std::vector<double>& y = ode.y[k];
    smp.eta.assign(y.begin(), y.begin() + dim);
    smp.theta.assign(y.begin() + dim, y.begin() + 2 * dim);
    const double a = y[2 * dim], b = y[2 * dim + 1];
    switch (primary) {
      case FlowParam::tau:
        smp.tau = ode.u[k];
        smp.t = a;
        smp.s = b;
        break;
      case FlowParam::t:
        smp.t = ode.u[k];
        smp.s = a;
        smp.tau = b;
        break;
      case FlowParam::s:
        smp.s = ode.u[k];
        smp.t = a;
        smp.tau = b;
        break;
    }
    traj.samples.push_back(std::move(smp));
  }
  return traj;
}

}  // namespace

Trajectory geodesic_flow(const HamiltonianSpec& spec, const PhaseState& state0,
                         std::pair<double, double> tau_span, const IntegratorConfig& cfg) {
  if (spec.kind != HamiltonianKind::geodesic_eta && spec.kind != HamiltonianKind::geodesic_theta)
    throw ConfigError("geodesic_flow drives geodesic_eta or geodesic_theta specs only");
  const ModelDescriptor& m = require_model(spec);
  const int dim = m.dim;
  const bool eta_kind = spec.kind == HamiltonianKind::geodesic_eta;

  OdeRhs rhs = [&m, dim, eta_kind](double, const std::vector<double>& y,
                                   std::vector<double>& dy) {
    const std::span<const double> eta(y.data(), static_cast<std::size_t>(dim));
    const std::span<const double> theta(y.data() + dim, static_cast<std::size_t>(dim));
    if (eta_kind) {
      if (!m.in_domain(eta_vec(std::vector<double>(eta.begin(), eta.end()))))
        throw DomainError("geodesic flow left the model domain");
      const MetricMatrix g = m.metric_lower_eta(eta);
      const double n2 = n2_eta(m, eta);
      if (!(n2 > 0.0)) throw DomainError("n^2 is not positive along the flow");
      const std::vector<MetricMatrix> dg = metric_lower_eta_grad(m, eta);
      const std::vector<double> dn2 = n2_grad_eta(m, eta);
      const std::vector<double> gth = mat_vec(g, theta);
      const double gthth = quad_form(g, theta, theta);
      for (int i = 0; i < dim; ++i) dy[i] = -gth[i] / n2;
      for (int i = 0; i < dim; ++i) {
        // d/d eta_i of g~_jk = dg_jk/n^2 - g_jk dn2_i / n^4
        dy[dim + i] =
            0.5 * (quad_form(dg[i], theta, theta) / n2 - gthth * dn2[i] / (n2 * n2));
      }
      dy[2 * dim] = 1.0 / n2;            // dt/dtau
      dy[2 * dim + 1] = 1.0 / std::sqrt(n2);  // ds/dtau
    } else {
      if (!m.in_domain(theta_vec(std::vector<double>(theta.begin(), theta.end()))))
        throw DomainError("geodesic flow left the model domain");
      const MetricMatrix g = m.metric_upper_theta(theta);
      const double n2 = n2_theta(m, theta);
      if (!(n2 > 0.0)) throw DomainError("n*^2 is not positive along the flow");
      const std::vector<MetricMatrix> dg = metric_upper_theta_grad(m, theta);
      const std::vector<double> dn2 = n2_grad_theta(m, theta);
      const std::vector<double> ge = mat_vec(g, eta);
      const double gee = quad_form(g, eta, eta);
      for (int i = 0; i < dim; ++i)
        dy[i] = -0.5 * (quad_form(dg[i], eta, eta) / n2 - gee * dn2[i] / (n2 * n2));
      for (int i = 0; i < dim; ++i) dy[dim + i] = ge[i] / n2;
      dy[2 * dim] = 1.0 / n2;
      dy[2 * dim + 1] = 1.0 / std::sqrt(n2);
    }
  };

  return run_phase_flow(m, spec, state0, tau_span, cfg, rhs,
                        hamiltonian_kind_name(spec.kind), FlowParam::tau);
}

Trajectory natural_flow_t(const HamiltonianSpec& spec, const PhaseState& state0,
                          std::pair<double, double> t_span, const IntegratorConfig& cfg) {
  if (spec.kind != HamiltonianKind::natural_ig)
    throw ConfigError("natural_flow_t drives natural_ig specs only");
  const ModelDescriptor& m = require_model(spec);
  const int dim = m.dim;

  OdeRhs rhs = [&m, dim](double, const std::vector<double>& y, std::vector<double>& dy) {
    const std::span<const double> eta(y.data(), static_cast<std::size_t>(dim));
    const std::span<const double> theta(y.data() + dim, static_cast<std::size_t>(dim));
    if (!m.in_domain(eta_vec(std::vector<double>(eta.begin(), eta.end()))))
      throw DomainError("natural flow left the model domain");
    const MetricMatrix g = m.metric_lower_eta(eta);
    const double n2 = n2_eta(m, eta);
    if (!(n2 > 0.0)) throw DomainError("n^2 is not positive along the flow");
    const std::vector<MetricMatrix> dg = metric_lower_eta_grad(m, eta);
    const std::vector<double> dn2 = n2_grad_eta(m, eta);
    const std::vector<double> gth = mat_vec(g, theta);
    for (int i = 0; i < dim; ++i) dy[i] = -gth[i];
    for (int i = 0; i < dim; ++i)
      dy[dim + i] = 0.5 * quad_form(dg[i], theta, theta) - 0.5 * dn2[i];
    dy[2 * dim] = std::sqrt(n2);  // ds/dt
    dy[2 * dim + 1] = n2;         // dtau/dt
  };

  return run_phase_flow(m, spec, state0, t_span, cfg, rhs, "natural_ig", FlowParam::t);
}

double geodesic_hamiltonian(const HamiltonianSpec& spec, const PhaseState& state) {
  const ModelDescriptor& m = require_model(spec);
  check_phase_dim(m, state);
  if (spec.kind == HamiltonianKind::geodesic_eta || spec.kind == HamiltonianKind::natural_ig) {
    const MetricMatrix g = m.metric_lower_eta(state.eta);
    const double n2 = n2_eta(m, state.eta);
    return std::sqrt(quad_form(g, state.theta, state.theta) / n2);
  }
  if (spec.kind == HamiltonianKind::geodesic_theta) {
    const MetricMatrix g = m.metric_upper_theta(state.theta);
    const double n2 = n2_theta(m, state.theta);
    return std::sqrt(quad_form(g, state.eta, state.eta) / n2);
  }
  throw ConfigError("geodesic_hamiltonian: unsupported kind");
}

double natural_hamiltonian(const HamiltonianSpec& spec, const PhaseState& state) {
  const ModelDescriptor& m = require_model(spec);
  check_phase_dim(m, state);
  const MetricMatrix g = m.metric_lower_eta(state.eta);
  return 0.5 * quad_form(g, state.theta, state.theta) - 0.5 * n2_eta(m, state.eta);
}

// ---------------------------------------------------------------------------
// Jacobi-Maupertuis transform.

JmTransformResult jm_transform(const HamiltonianSpec& natural, double energy) {
  JmTransformResult out;
  if (natural.kind == HamiltonianKind::natural_ig) {
    const std::shared_ptr<const ModelDescriptor> model = natural.model;
    if (!model) throw ConfigError("jm_transform: natural_ig spec has no model");
    auto potential = natural.potential
                         ? natural.potential
                         : std::function<double(std::span<const double>)>(
                               [model](std::span<const double> eta) { return -n2_eta(*model, eta); });
    auto lambda = [potential, energy](std::span<const double> x) {
      const double v = energy - potential(x);
      if (!(v > 0.0))
        throw TurningPointError("jm_transform: E - U is not positive at this point");
      return v;
    };
    out.dtau_dbase = lambda;
    out.metric_lower = [model, lambda](std::span<const double> eta) {
      return (1.0 / lambda(eta)) * model->metric_lower_eta(eta);
    };
    out.metric_upper = [model, lambda](std::span<const double> eta) {
      return lambda(eta) * inverse_spd(model->metric_lower_eta(eta));
    };
    out.geodesic = geodesic_eta_spec(model);
    return out;
  }
  if (natural.kind == HamiltonianKind::natural_optics) {
    const std::shared_ptr<const RefractiveField> field = natural.field;
    if (!field) throw ConfigError("jm_transform: natural_optics spec has no field");
    auto potential = natural.potential
                         ? natural.potential
                         : std::function<double(std::span<const double>)>(
                               [field](std::span<const double> q) { return -field->index(q); });
    auto lambda = [potential, energy](std::span<const double> x) {
      const double v = energy - potential(x);
      if (!(v > 0.0))
        throw TurningPointError("jm_transform: E - U is not positive at this point");
      return v;
    };
    out.dtau_dbase = lambda;
    out.metric_upper = [field, lambda](std::span<const double> q) {
      const double l = lambda(q);
      const MetricMatrix gl = field->metric ? field->metric(q)
                                            : MetricMatrix::identity(field->dim);
      return (1.0 / (l * l)) * inverse_spd(gl);
    };
    out.metric_lower = [field, lambda](std::span<const double> q) {
      const double l = lambda(q);
      const MetricMatrix gl = field->metric ? field->metric(q)
                                            : MetricMatrix::identity(field->dim);
      return (l * l) * gl;
    };
    out.geodesic.kind = HamiltonianKind::geodesic_optics;
    out.geodesic.field = field;
    return out;
  }
  throw ConfigError("jm_transform expects a natural Hamiltonian spec");
}

// ---------------------------------------------------------------------------
// Reparametrization and conserved products.

namespace {

std::vector<double> param_column(const Trajectory& traj, FlowParam p) {
  std::vector<double> out;
  out.reserve(traj.samples.size());
  for (const FlowSample& s : traj.samples) out.push_back(param_value(s, p));
  return out;
}

void require_strictly_increasing(std::span<const double> u, const char* what) {
  for (std::size_t i = 0; i + 1 < u.size(); ++i)
    if (!(u[i + 1] > u[i]))
      throw NonMonotoneError(std::string("parameter column '") + what +
                             "' is not strictly increasing");
}

// n along the trajectory as used by the time maps: eta-side drivers use
// n(eta), theta-side drivers use n*(theta).
double sample_index_n(const Trajectory& traj, const ModelDescriptor& m, const FlowSample& s) {
  const bool theta_side =
      traj.driver.kind == "gradient_theta" || traj.driver.kind == "geodesic_theta";
  const double n2 = theta_side ? n2_theta(m, s.theta) : n2_eta(m, s.eta);
  if (!(n2 > 0.0)) throw DomainError("reparametrize: n^2 not positive along trajectory");
  return std::sqrt(n2);
}

double rate_from_n(double n, FlowParam from, FlowParam to) {
  auto weight = [n](FlowParam p) {
    switch (p) {
      case FlowParam::t: return 1.0;
      case FlowParam::s: return n;
      case FlowParam::tau: return n * n;
    }
    return 1.0;
  };
  return weight(to) / weight(from);
}

}  // namespace

std::vector<FlowSample> sample_at(const Trajectory& traj, FlowParam param,
                                  std::span<const double> grid) {
  if (traj.samples.size() < 2) throw TooFewSamplesError("sample_at: need at least 2 samples");
  const std::vector<double> u = param_column(traj, param);
  require_strictly_increasing(u, flow_param_name(param));

  const int dim = traj.dim;
  const bool has_theta = !traj.samples.front().theta.empty();
  const bool has_eta = !traj.samples.front().eta.empty();

  auto build_curve = [&](auto getter) {
    std::vector<double> col(traj.samples.size());
    for (std::size_t k = 0; k < traj.samples.size(); ++k) col[k] = getter(traj.samples[k]);
    return PchipCurve(u, col);
  };

  const PchipCurve ct = build_curve([](const FlowSample& s) { return s.t; });
  const PchipCurve cs = build_curve([](const FlowSample& s) { return s.s; });
  const PchipCurve ctau = build_curve([](const FlowSample& s) { return s.tau; });
  std::vector<PchipCurve> cth, cet;
  for (int i = 0; i < dim; ++i) {
    if (has_theta) cth.push_back(build_curve([i](const FlowSample& s) { return s.theta[i]; }));
    if (has_eta) cet.push_back(build_curve([i](const FlowSample& s) { return s.eta[i]; }));
  }

  std::vector<FlowSample> out;
  out.reserve(grid.size());
  for (double g : grid) {
    FlowSample smp;
    smp.t = ct(g);
    smp.s = cs(g);
    smp.tau = ctau(g);
    switch (param) {
      case FlowParam::t: smp.t = g; break;
      case FlowParam::s: smp.s = g; break;
      case FlowParam::tau: smp.tau = g; break;
    }
    for (int i = 0; i < dim; ++i) {
      if (has_theta) smp.theta.push_back(cth[i](g));
      if (has_eta) smp.eta.push_back(cet[i](g));
    }
    out.push_back(std::move(smp));
  }
  return out;
}

Trajectory reparametrize(const Trajectory& traj, FlowParam from, FlowParam to,
                         const ModelDescriptor& m) {
  if (traj.samples.size() < 2)
    throw TooFewSamplesError("reparametrize: need at least 2 samples");
  if (traj.samples.front().eta.empty() && traj.samples.front().theta.empty())
    throw ConfigError("reparametrize: trajectory carries no state");

  const std::vector<double> u = param_column(traj, from);
  require_strictly_increasing(u, flow_param_name(from));

  // Rebuild the target column by trapezoidal quadrature of the n-relations.
  std::vector<double> w(traj.samples.size());
  w[0] = param_value(traj.samples.front(), to);
  std::vector<double> rate(traj.samples.size());
  for (std::size_t k = 0; k < traj.samples.size(); ++k)
    rate[k] = rate_from_n(sample_index_n(traj, m, traj.samples[k]), from, to);
  for (std::size_t k = 0; k + 1 < traj.samples.size(); ++k)
    w[k + 1] = w[k] + 0.5 * (rate[k] + rate[k + 1]) * (u[k + 1] - u[k]);

  // Interpolate every column against w on a uniform grid of the target.
  Trajectory tmp = traj;
  for (std::size_t k = 0; k < tmp.samples.size(); ++k) {
    switch (to) {
      case FlowParam::t: tmp.samples[k].t = w[k]; break;
      case FlowParam::s: tmp.samples[k].s = w[k]; break;
      case FlowParam::tau: tmp.samples[k].tau = w[k]; break;
    }
  }
  const std::size_t count = traj.samples.size();
  std::vector<double> grid(count);
  const double w0 = w.front(), w1 = w.back();
  for (std::size_t k = 0; k < count; ++k)
    grid[k] = w0 + (w1 - w0) * static_cast<double>(k) / static_cast<double>(count - 1);

  Trajectory out = traj;
  out.samples = sample_at(tmp, to, grid);
  return out;
}

std::vector<std::vector<double>> integrability_products(const Trajectory& theta_traj,
                                                        const Trajectory& eta_traj) {
  if (theta_traj.samples.size() != eta_traj.samples.size())
    throw GridMismatchError("integrability_products: sample counts differ");
  if (theta_traj.samples.empty())
    throw GridMismatchError("integrability_products: empty trajectories");
  if (theta_traj.samples.front().theta.empty() || eta_traj.samples.front().eta.empty())
    throw GridMismatchError("integrability_products: missing theta or eta block");
  const int dim = static_cast<int>(theta_traj.samples.front().theta.size());
  if (static_cast<int>(eta_traj.samples.front().eta.size()) != dim)
    throw GridMismatchError("integrability_products: dimensions differ");

  std::vector<std::vector<double>> out;
  out.reserve(theta_traj.samples.size());
  for (std::size_t k = 0; k < theta_traj.samples.size(); ++k) {
    const FlowSample& a = theta_traj.samples[k];
    const FlowSample& b = eta_traj.samples[k];
    if (std::abs(a.t - b.t) > 1e-12)
      throw GridMismatchError("integrability_products: t grids differ");
    std::vector<double> c(dim);
    for (int i = 0; i < dim; ++i) c[i] = a.theta[i] * b.eta[i];
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace igflow
