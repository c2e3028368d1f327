#include "igflow/manifold.hpp"

#include <cmath>

#include "igflow/util.hpp"

namespace igflow {

const char* chart_name(Chart c) { return c == Chart::theta ? "theta" : "eta"; }

void require_in_domain(const ModelDescriptor& m, const CoordVector& x) {
  if (static_cast<int>(x.values.size()) != m.dim)
    throw DomainError("coordinate vector has wrong dimension for model '" + m.id + "'");
  if (!all_finite(x.values)) throw NonFiniteError("coordinate vector has non-finite entries");
  if (!m.in_domain(x))
    throw DomainError("point is outside the domain of model '" + m.id + "' (" +
                      chart_name(x.chart) + " chart)");
}

CoordVector coord_map(const ModelDescriptor& m, const CoordVector& x) {
  require_in_domain(m, x);
  CoordVector out;
  if (x.chart == Chart::eta) {
    out = theta_vec(m.theta_of_eta(x.values));
  } else {
    out = eta_vec(m.eta_of_theta(x.values));
  }
  if (!all_finite(out.values)) throw NonFiniteError("dual map produced non-finite coordinates");
  return out;
}

MetricMatrix metric_at(const ModelDescriptor& m, const CoordVector& x) {
  require_in_domain(m, x);
  MetricMatrix g = (x.chart == Chart::eta) ? m.metric_lower_eta(x.values)
                                           : m.metric_upper_theta(x.values);
  validate_metric(g);
  return g;
}

double legendre_residual(const ModelDescriptor& m, const CoordVector& theta) {
  if (theta.chart != Chart::theta) throw DomainError("legendre_residual expects a theta-chart point");
  require_in_domain(m, theta);
  const std::vector<double> eta = m.eta_of_theta(theta.values);
  double dot = 0.0;
  for (int i = 0; i < m.dim; ++i) dot += theta.values[i] * eta[i];
  return std::abs(m.psi(theta.values) + m.psi_star(eta) - dot);
}

double metric_duality_residual(const ModelDescriptor& m, const CoordVector& x) {
  require_in_domain(m, x);
  const CoordVector dual = coord_map(m, x);
  const CoordVector& th = (x.chart == Chart::theta) ? x : dual;
  const CoordVector& et = (x.chart == Chart::eta) ? x : dual;
  const MetricMatrix upper = m.metric_upper_theta(th.values);
  const MetricMatrix lower = m.metric_lower_eta(et.values);
  validate_metric(upper);
  validate_metric(lower);
  return identity_residual(upper, lower);
}

double fd_gradient_check(const ModelDescriptor& m, const CoordVector& x, double h) {
  if (!(h > 0.0)) throw DomainError("fd_gradient_check requires h > 0");
  require_in_domain(m, x);
  const auto& pot = (x.chart == Chart::eta) ? m.psi_star : m.psi;
  const std::vector<double> dual = (x.chart == Chart::eta) ? m.theta_of_eta(x.values)
                                                           : m.eta_of_theta(x.values);
  double worst = 0.0;
  std::vector<double> xp = x.values, xm = x.values;
  for (int i = 0; i < m.dim; ++i) {
    xp[i] = x.values[i] + h;
    xm[i] = x.values[i] - h;
    if (!m.in_domain({x.chart, xp}) || !m.in_domain({x.chart, xm}))
      throw DomainError("fd_gradient_check: x +- h leaves the model domain");
    const double fd = (pot(xp) - pot(xm)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - dual[i]));
    xp[i] = x.values[i];
    xm[i] = x.values[i];
  }
  return worst;
}

namespace {

std::vector<MetricMatrix> fd_metric_grad(
    const std::function<MetricMatrix(std::span<const double>)>& fn,
    std::span<const double> x, int dim) {
  std::vector<MetricMatrix> out;
  out.reserve(dim);
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  for (int i = 0; i < dim; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const MetricMatrix gp = fn(xp);
    const MetricMatrix gm = fn(xm);
    out.push_back((1.0 / (2.0 * h)) * (gp - gm));
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return out;
}

}  // namespace

std::vector<MetricMatrix> metric_lower_eta_grad(const ModelDescriptor& m,
                                                std::span<const double> eta) {
  if (m.metric_lower_eta_grad_fn) return m.metric_lower_eta_grad_fn(eta);
  return fd_metric_grad(m.metric_lower_eta, eta, m.dim);
}

std::vector<MetricMatrix> metric_upper_theta_grad(const ModelDescriptor& m,
                                                  std::span<const double> theta) {
  if (m.metric_upper_theta_grad_fn) return m.metric_upper_theta_grad_fn(theta);
  return fd_metric_grad(m.metric_upper_theta, theta, m.dim);
}

}  // namespace igflow
