#include "igflow/optics.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "igflow/interp.hpp"
#include "igflow/util.hpp"

namespace igflow {

namespace {

MetricMatrix field_metric_lower(const RefractiveField& f, std::span<const double> q) {
  return f.metric ? f.metric(q) : MetricMatrix::identity(f.dim);
}

std::vector<MetricMatrix> field_metric_lower_grad(const RefractiveField& f,
                                                  std::span<const double> q) {
  if (f.metric_grad) return f.metric_grad(q);
  if (!f.metric) return std::vector<MetricMatrix>(f.dim, MetricMatrix(f.dim));
  std::vector<MetricMatrix> out;
  std::vector<double> qp(q.begin(), q.end()), qm(q.begin(), q.end());
  for (int i = 0; i < f.dim; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(q[i]));
    qp[i] = q[i] + h;
    qm[i] = q[i] - h;
    out.push_back((1.0 / (2.0 * h)) * (f.metric(qp) - f.metric(qm)));
    qp[i] = q[i];
    qm[i] = q[i];
  }
  return out;
}

std::vector<double> field_index_grad(const RefractiveField& f, std::span<const double> q) {
  if (f.index_grad) return f.index_grad(q);
  std::vector<double> out(f.dim);
  std::vector<double> qp(q.begin(), q.end()), qm(q.begin(), q.end());
  for (int i = 0; i < f.dim; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(q[i]));
    qp[i] = q[i] + h;
    qm[i] = q[i] - h;
    out[i] = (f.index(qp) - f.index(qm)) / (2.0 * h);
    qp[i] = q[i];
    qm[i] = q[i];
  }
  return out;
}

void require_field_point(const RefractiveField& f, std::span<const double> q) {
  if (f.domain && !f.domain(q)) throw DomainError("ray left the field domain");
}

struct FieldEval {
  double n;
  MetricMatrix upper;                 // g^jk(q)
  std::vector<MetricMatrix> d_upper;  // d g^jk / d q^i
  std::vector<double> dn;
};

FieldEval eval_field(const RefractiveField& f, std::span<const double> q, bool need_derivs) {
  require_field_point(f, q);
  FieldEval ev;
  ev.n = f.index(q);
  if (!(ev.n > 0.0)) throw DomainError("refractive index is not positive");
  const MetricMatrix lower = field_metric_lower(f, q);
  ev.upper = inverse_spd(lower);
  if (need_derivs) {
    ev.dn = field_index_grad(f, q);
    const std::vector<MetricMatrix> dlow = field_metric_lower_grad(f, q);
    ev.d_upper.reserve(f.dim);
    for (int i = 0; i < f.dim; ++i) {
      // d(g^-1) = -g^-1 (dg) g^-1
      ev.d_upper.push_back(-1.0 * mat_mul(ev.upper, mat_mul(dlow[i], ev.upper)));
    }
  }
  return ev;
}

}  // namespace

double momentum_norm(const RefractiveField& field, std::span<const double> q,
                     std::span<const double> p) {
  const MetricMatrix upper = inverse_spd(field_metric_lower(field, q));
  return std::sqrt(quad_form(upper, p, p));
}

HamiltonianSpec natural_optics_spec(std::shared_ptr<const RefractiveField> field,
                                    double energy) {
  HamiltonianSpec spec;
  spec.kind = HamiltonianKind::natural_optics;
  spec.field = std::move(field);
  spec.energy = energy;
  return spec;
}

RefractiveField homogeneous_field(int dim, double n) {
  if (!(n > 0.0)) throw ConfigError("homogeneous field needs n > 0");
  RefractiveField f;
  f.dim = dim;
  f.id = "homogeneous";
  f.index = [n](std::span<const double>) { return n; };
  f.index_grad = [dim](std::span<const double>) { return std::vector<double>(dim, 0.0); };
  return f;
}

RefractiveField linear_field(double n0, std::vector<double> slope) {
  RefractiveField f;
  f.dim = static_cast<int>(slope.size());
  f.id = "linear";
  auto sl = std::make_shared<const std::vector<double>>(std::move(slope));
  f.index = [n0, sl](std::span<const double> q) {
    double v = n0;
    for (std::size_t i = 0; i < sl->size(); ++i) v += (*sl)[i] * q[i];
    return v;
  };
  f.index_grad = [sl](std::span<const double>) { return *sl; };
  f.domain = [n0, sl](std::span<const double> q) {
    double v = n0;
    for (std::size_t i = 0; i < sl->size(); ++i) v += (*sl)[i] * q[i];
    return v > 0.0;
  };
  return f;
}

RefractiveField radial_field(int dim, double n0, double coeff) {
  if (!(n0 > 0.0)) throw ConfigError("radial field needs n0 > 0");
  RefractiveField f;
  f.dim = dim;
  f.id = "radial";
  f.index = [n0, coeff](std::span<const double> q) {
    double r2 = 0.0;
    for (double v : q) r2 += v * v;
    return n0 + coeff * r2;
  };
  f.index_grad = [coeff, dim](std::span<const double> q) {
    std::vector<double> g(dim);
    for (int i = 0; i < dim; ++i) g[i] = 2.0 * coeff * q[i];
    return g;
  };
  f.domain = [n0, coeff](std::span<const double> q) {
    double r2 = 0.0;
    for (double v : q) r2 += v * v;
    return n0 + coeff * r2 > 0.0;
  };
  return f;
}

RefractiveField field_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid field JSON: ") + e.what());
  }
  const std::string kind = j.value("kind", "");
  if (kind == "homogeneous") {
    return homogeneous_field(j.value("dim", 2), j.value("n", 1.0));
  }
  if (kind == "linear") {
    if (!j.contains("slope")) throw ConfigError("linear field needs a \"slope\" array");
    return linear_field(j.value("n0", 1.0), j["slope"].get<std::vector<double>>());
  }
  if (kind == "radial") {
    return radial_field(j.value("dim", 2), j.value("n0", 1.0), j.value("coeff", 0.0));
  }
  throw ConfigError("unknown field kind '" + kind + "'");
}

RefractiveField load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return field_from_json_text(text);
}

RefractiveField field_from_model(std::shared_ptr<const ModelDescriptor> model) {
  RefractiveField f;
  f.dim = model->dim;
  f.id = "model:" + model->id;
  f.index = [model](std::span<const double> q) {
    const std::vector<double> theta = model->theta_of_eta(q);
    const double n2 = quad_form(model->metric_lower_eta(q), theta, theta);
    if (!(n2 > 0.0)) throw DomainError("model index is not positive here");
    return std::sqrt(n2);
  };
  f.metric = [model](std::span<const double> q) {
    return inverse_spd(model->metric_lower_eta(q));
  };
  f.domain = [model](std::span<const double> q) {
    return model->in_domain(eta_vec(std::vector<double>(q.begin(), q.end())));
  };
  return f;
}

double ray_param_value(const RaySample& s, FlowParam p) {
  switch (p) {
    case FlowParam::t: return s.t;
    case FlowParam::s: return s.s;
    case FlowParam::tau: return s.tau;
  }
  return 0.0;
}

RayTrajectory ray_trace(const RefractiveField& field, const RayState& state0, FlowParam param,
                        std::pair<double, double> span, const IntegratorConfig& cfg) {
  const int dim = field.dim;
  if (static_cast<int>(state0.q.size()) != dim || static_cast<int>(state0.p.size()) != dim)
    throw ConfigError("ray state dimension does not match the field");
  require_field_point(field, state0.q);

  OdeRhs rhs = [&field, dim, param](double, const std::vector<double>& y,
                                    std::vector<double>& dy) {
    const std::span<const double> q(y.data(), static_cast<std::size_t>(dim));
    const std::span<const double> p(y.data() + dim, static_cast<std::size_t>(dim));
    const FieldEval ev = eval_field(field, q, true);
    const double n = ev.n;
    const std::vector<double> gp = mat_vec(ev.upper, p);

    switch (param) {
      case FlowParam::s: {
        const double norm = std::sqrt(quad_form(ev.upper, p, p));
        if (!(norm > 0.0)) throw DomainError("momentum norm vanished along the ray");
        for (int i = 0; i < dim; ++i) dy[i] = gp[i] / norm;
        for (int i = 0; i < dim; ++i)
          dy[dim + i] = -0.5 * quad_form(ev.d_upper[i], p, p) / norm + ev.dn[i];
        dy[2 * dim] = 1.0 / n;  // dt/ds
        dy[2 * dim + 1] = n;    // dtau/ds
        break;
      }
      case FlowParam::tau: {
        const double n2 = n * n;
        for (int i = 0; i < dim; ++i) dy[i] = gp[i] / n2;
        for (int i = 0; i < dim; ++i) {
          // d g~^jk / d q^i with g~ = g^jk / n^2
          const double dq =
              quad_form(ev.d_upper[i], p, p) / n2 - 2.0 * quad_form(ev.upper, p, p) * ev.dn[i] / (n2 * n);
          dy[dim + i] = -0.5 * dq;
        }
        dy[2 * dim] = 1.0 / n2;  // dt/dtau
        dy[2 * dim + 1] = 1.0 / n;  // ds/dtau
        break;
      }
      case FlowParam::t: {
        for (int i = 0; i < dim; ++i) dy[i] = gp[i];
        for (int i = 0; i < dim; ++i)
          dy[dim + i] = -0.5 * quad_form(ev.d_upper[i], p, p) + n * ev.dn[i];
        dy[2 * dim] = n;        // ds/dt
        dy[2 * dim + 1] = n * n;  // dtau/dt
        break;
      }
    }
  };

  std::vector<double> y0;
  y0.insert(y0.end(), state0.q.begin(), state0.q.end());
  y0.insert(y0.end(), state0.p.begin(), state0.p.end());
  y0.push_back(0.0);
  y0.push_back(0.0);
  const OdeResult ode = integrate_ode(rhs, std::move(y0), span, cfg);

  RayTrajectory traj;
  traj.field_id = field.id;
  traj.param = param;
  traj.config = cfg;
  traj.status = ode.status;
  traj.dim = dim;
  for (std::size_t k = 0; k < ode.u.size(); ++k) {
    RaySample smp;
    const std::vector<double>& y = ode.y[k];
    smp.q.assign(y.begin(), y.begin() + dim);
    smp.p.assign(y.begin() + dim, y.begin() + 2 * dim);
    const double a = y[2 * dim], b = y[2 * dim + 1];
    switch (param) {
      case FlowParam::s:
        smp.s = ode.u[k];
        smp.t = a;
        smp.tau = b;
        break;
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
    }
    traj.samples.push_back(std::move(smp));
  }
  return traj;
}

namespace {

// Derivative of a sampled column on a (possibly nonuniform) grid; second
// order three-point formulas, one-sided at the ends.
std::vector<double> grid_derivative(std::span<const double> u, std::span<const double> v) {
  const std::size_t n = u.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      const double h1 = u[1] - u[0], h2 = u[2] - u[1];
      d[0] = (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * v[0] +
             ((h1 + h2) / (h1 * h2)) * v[1] - (h1 / (h2 * (h1 + h2))) * v[2];
    } else if (i == n - 1) {
      const double h1 = u[n - 2] - u[n - 3], h2 = u[n - 1] - u[n - 2];
      d[n - 1] = (h2 / (h1 * (h1 + h2))) * v[n - 3] - ((h1 + h2) / (h1 * h2)) * v[n - 2] +
                 ((h1 + 2.0 * h2) / (h2 * (h1 + h2))) * v[n - 1];
    } else {
      const double hm = u[i] - u[i - 1], hp = u[i + 1] - u[i];
      d[i] = (hm * hm * v[i + 1] - hp * hp * v[i - 1] + (hp * hp - hm * hm) * v[i]) /
             (hp * hm * (hp + hm));
    }
  }
  return d;
}

}  // namespace

double eikonal_residual(const RayTrajectory& traj, const RefractiveField& field) {
  if (traj.param != FlowParam::s)
    throw ConfigError("eikonal_residual expects an s-parametrized trajectory");
  const std::size_t n = traj.samples.size();
  if (n < 3) throw TooFewSamplesError("eikonal_residual: need at least 3 samples");
  const int dim = traj.dim;

  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) s[k] = traj.samples[k].s;

  // w = n(q) dq/ds per component, then compare dw/ds against grad n.
  std::vector<std::vector<double>> w(dim, std::vector<double>(n));
  for (int i = 0; i < dim; ++i) {
    std::vector<double> qi(n);
    for (std::size_t k = 0; k < n; ++k) qi[k] = traj.samples[k].q[i];
    const std::vector<double> v = grid_derivative(s, qi);
    for (std::size_t k = 0; k < n; ++k) w[i][k] = field.index(traj.samples[k].q) * v[k];
  }
  double worst = 0.0;
  for (int i = 0; i < dim; ++i) {
    const std::vector<double> dw = grid_derivative(s, w[i]);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const std::vector<double> gn = field_index_grad(field, traj.samples[k].q);
      worst = std::max(worst, std::abs(dw[k] - gn[i]));
    }
  }
  return worst;
}

RayConservation ray_conservation_check(const RayTrajectory& traj, const RefractiveField& field) {
  RayConservation out;
  for (const RaySample& smp : traj.samples) {
    const double n = field.index(smp.q);
    const double norm = momentum_norm(field, smp.q, smp.p);
    out.momentum_norm_residual = std::max(out.momentum_norm_residual, std::abs(norm - n));
    out.energy_residual = std::max(out.energy_residual, std::abs(norm - n));
  }
  return out;
}

std::vector<RaySample> sample_ray_at(const RayTrajectory& traj, FlowParam param,
                                     std::span<const double> grid) {
  if (traj.samples.size() < 2) throw TooFewSamplesError("sample_ray_at: need at least 2 samples");
  const std::size_t n = traj.samples.size();
  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = ray_param_value(traj.samples[k], param);
  for (std::size_t k = 0; k + 1 < n; ++k)
    if (!(u[k + 1] > u[k]))
      throw NonMonotoneError("sample_ray_at: parameter column is not strictly increasing");

  const int dim = traj.dim;
  auto build_curve = [&](auto getter) {
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = getter(traj.samples[k]);
    return PchipCurve(u, col);
  };
  const PchipCurve ct = build_curve([](const RaySample& r) { return r.t; });
  const PchipCurve cs = build_curve([](const RaySample& r) { return r.s; });
  const PchipCurve ctau = build_curve([](const RaySample& r) { return r.tau; });
  std::vector<PchipCurve> cq, cp;
  for (int i = 0; i < dim; ++i) {
    cq.push_back(build_curve([i](const RaySample& r) { return r.q[i]; }));
    cp.push_back(build_curve([i](const RaySample& r) { return r.p[i]; }));
  }

  std::vector<RaySample> out;
  out.reserve(grid.size());
  for (double g : grid) {
    RaySample smp;
    smp.t = ct(g);
    smp.s = cs(g);
    smp.tau = ctau(g);
    switch (param) {
      case FlowParam::t: smp.t = g; break;
      case FlowParam::s: smp.s = g; break;
      case FlowParam::tau: smp.tau = g; break;
    }
    for (int i = 0; i < dim; ++i) {
      smp.q.push_back(cq[i](g));
      smp.p.push_back(cp[i](g));
    }
    out.push_back(std::move(smp));
  }
  return out;
}

RayTrajectory reparametrize(const RayTrajectory& traj, FlowParam from, FlowParam to,
                            const RefractiveField& field) {
  if (traj.samples.size() < 2)
    throw TooFewSamplesError("reparametrize: need at least 2 samples");
  const std::size_t n = traj.samples.size();
  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = ray_param_value(traj.samples[k], from);
  for (std::size_t k = 0; k + 1 < n; ++k)
    if (!(u[k + 1] > u[k]))
      throw NonMonotoneError("reparametrize: source parameter is not strictly increasing");

  auto weight = [](double nv, FlowParam p) {
    switch (p) {
      case FlowParam::t: return 1.0;
      case FlowParam::s: return nv;
      case FlowParam::tau: return nv * nv;
    }
    return 1.0;
  };
  std::vector<double> w(n), rate(n);
  w[0] = ray_param_value(traj.samples.front(), to);
  for (std::size_t k = 0; k < n; ++k) {
    const double nv = field.index(traj.samples[k].q);
    if (!(nv > 0.0)) throw DomainError("reparametrize: index not positive along ray");
    rate[k] = weight(nv, to) / weight(nv, from);
  }
  for (std::size_t k = 0; k + 1 < n; ++k)
    w[k + 1] = w[k] + 0.5 * (rate[k] + rate[k + 1]) * (u[k + 1] - u[k]);

  RayTrajectory tmp = traj;
  for (std::size_t k = 0; k < n; ++k) {
    switch (to) {
      case FlowParam::t: tmp.samples[k].t = w[k]; break;
      case FlowParam::s: tmp.samples[k].s = w[k]; break;
      case FlowParam::tau: tmp.samples[k].tau = w[k]; break;
    }
  }
  std::vector<double> grid(n);
  const double w0 = w.front(), w1 = w.back();
  for (std::size_t k = 0; k < n; ++k)
    grid[k] = w0 + (w1 - w0) * static_cast<double>(k) / static_cast<double>(n - 1);

  RayTrajectory out = traj;
  out.param = to;
  out.samples = sample_ray_at(tmp, to, grid);
  return out;
}

}  // namespace igflow
