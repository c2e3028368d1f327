#include "igflow/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "igflow/special_functions.hpp"
#include "igflow/util.hpp"

namespace igflow {

namespace {

constexpr double kHalfLog2PiE = 0.5 * (1.8378770664093454836 + 1.0);  // (ln(2 pi) + 1) / 2

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ---------------------------------------------------------------------------
// Gaussian model.  theta = (mu/sigma^2, -1/(2 sigma^2)), eta = (mu, mu^2 + sigma^2).

MetricMatrix gaussian_lower(std::span<const double> e) {
  const double u = e[1] - e[0] * e[0];  // sigma^2
  MetricMatrix g(2);
  g(0, 0) = u;  // 2u * 1/2
  g(0, 1) = g(1, 0) = 2.0 * u * e[0];
  g(1, 1) = 2.0 * u * (e[0] * e[0] + e[1]);
  return g;
}

MetricMatrix gaussian_upper(std::span<const double> t) {
  MetricMatrix g(2);
  g(0, 0) = 2.0 * (t[0] * t[0] - t[1]);
  g(0, 1) = g(1, 0) = 2.0 * t[0] * t[1];
  g(1, 1) = 2.0 * t[1] * t[1];
  return g;
}

std::vector<MetricMatrix> gaussian_lower_grad(std::span<const double> e) {
  const double u = e[1] - e[0] * e[0];
  MetricMatrix base(2);
  base(0, 0) = 0.5;
  base(0, 1) = base(1, 0) = e[0];
  base(1, 1) = e[0] * e[0] + e[1];

  MetricMatrix d0 = -4.0 * e[0] * base;
  MetricMatrix extra0(2);
  extra0(0, 1) = extra0(1, 0) = 1.0;
  extra0(1, 1) = 2.0 * e[0];
  d0 = d0 + 2.0 * u * extra0;

  MetricMatrix d1 = 2.0 * base;
  d1(1, 1) += 2.0 * u;
  return {d0, d1};
}

std::vector<MetricMatrix> gaussian_upper_grad(std::span<const double> t) {
  MetricMatrix d0(2);
  d0(0, 0) = 4.0 * t[0];
  d0(0, 1) = d0(1, 0) = 2.0 * t[1];
  MetricMatrix d1(2);
  d1(0, 0) = -2.0;
  d1(0, 1) = d1(1, 0) = 2.0 * t[0];
  d1(1, 1) = 4.0 * t[1];
  return {d0, d1};
}

// ---------------------------------------------------------------------------
// Gamma model.  theta = (-beta, nu - 1), eta = (nu/beta, digamma(nu) - ln beta).

MetricMatrix gamma_lower_bn(double beta, double nu) {
  MetricMatrix g(2);
  g(0, 0) = nu / (beta * beta);
  g(0, 1) = g(1, 0) = 1.0 / beta;
  g(1, 1) = trigamma(nu);
  return g;
}

MetricMatrix gamma_upper_bn(double beta, double nu) {
  const double den = nu * trigamma(nu) - 1.0;
  MetricMatrix g(2);
  g(0, 0) = beta * beta * trigamma(nu) / den;
  g(0, 1) = g(1, 0) = -beta / den;
  g(1, 1) = nu / den;
  return g;
}

struct GammaJacobian {
  // d(beta,nu)/d(eta_1,eta_2)
  double db[2];
  double dn[2];
};

GammaJacobian gamma_param_jacobian(double beta, double nu) {
  const double den = nu * trigamma(nu) - 1.0;
  GammaJacobian j;
  j.db[0] = -beta * beta * trigamma(nu) / den;
  j.db[1] = beta / den;
  j.dn[0] = -beta / den;
  j.dn[1] = nu / den;
  return j;
}

std::vector<MetricMatrix> gamma_lower_grad_eta(double beta, double nu) {
  const double t2 = detail::tetragamma(nu);
  MetricMatrix dGb(2);
  dGb(0, 0) = -2.0 * nu / (beta * beta * beta);
  dGb(0, 1) = dGb(1, 0) = -1.0 / (beta * beta);
  MetricMatrix dGn(2);
  dGn(0, 0) = 1.0 / (beta * beta);
  dGn(1, 1) = t2;
  const GammaJacobian j = gamma_param_jacobian(beta, nu);
  std::vector<MetricMatrix> out;
  out.reserve(2);
  for (int i = 0; i < 2; ++i) out.push_back(j.db[i] * dGb + j.dn[i] * dGn);
  return out;
}

std::vector<MetricMatrix> gamma_upper_grad_theta(double beta, double nu) {
  const double t1 = trigamma(nu);
  const double t2 = detail::tetragamma(nu);
  const double den = nu * t1 - 1.0;

  MetricMatrix H(2);
  H(0, 0) = beta * beta * t1;
  H(0, 1) = H(1, 0) = -beta;
  H(1, 1) = nu;

  MetricMatrix dHb(2);
  dHb(0, 0) = 2.0 * beta * t1 / den;
  dHb(0, 1) = dHb(1, 0) = -1.0 / den;

  MetricMatrix dHn = (-(t1 + nu * t2) / (den * den)) * H;
  dHn(0, 0) += beta * beta * t2 / den;
  dHn(1, 1) += 1.0 / den;

  // theta^1 = -beta, theta^2 = nu - 1
  return {-1.0 * dHb, dHn};
}

GammaParams gamma_params_of_theta(std::span<const double> t) {
  return GammaParams{-t[0], t[1] + 1.0};
}

// ---------------------------------------------------------------------------

ModelDescriptor build_gaussian() {
  ModelDescriptor m;
  m.id = "gaussian";
  m.dim = 2;
  m.in_domain = [](const CoordVector& x) {
    if (x.values.size() != 2 || !all_finite(x.values)) return false;
    if (x.chart == Chart::eta) return x.values[1] - x.values[0] * x.values[0] > 0.0;
    return x.values[1] < 0.0;
  };
  m.psi_star = [](std::span<const double> e) {
    const double u = e[1] - e[0] * e[0];
    if (!(u > 0.0)) throw DomainError("gaussian: eta_2 - eta_1^2 must be positive");
    return -kHalfLog2PiE - 0.5 * std::log(u);
  };
  m.theta_of_eta = [](std::span<const double> e) {
    const double u = e[1] - e[0] * e[0];
    if (!(u > 0.0)) throw DomainError("gaussian: eta_2 - eta_1^2 must be positive");
    return std::vector<double>{e[0] / u, -0.5 / u};
  };
  m.eta_of_theta = [](std::span<const double> t) {
    if (!(t[1] < 0.0)) throw DomainError("gaussian: theta_2 must be negative");
    const double s2 = -0.5 / t[1];
    const double mu = t[0] * s2;
    return std::vector<double>{mu, mu * mu + s2};
  };
  // Psi via the Legendre identity on Psi*; no independently transcribed form.
  m.psi = [eta_of = m.eta_of_theta, psi_star = m.psi_star](std::span<const double> t) {
    const std::vector<double> e = eta_of(t);
    return dot(t, e) - psi_star(e);
  };
  m.metric_lower_eta = [](std::span<const double> e) { return gaussian_lower(e); };
  m.metric_upper_theta = [](std::span<const double> t) { return gaussian_upper(t); };
  m.metric_lower_eta_grad_fn = [](std::span<const double> e) { return gaussian_lower_grad(e); };
  m.metric_upper_theta_grad_fn = [](std::span<const double> t) { return gaussian_upper_grad(t); };
  return m;
}

ModelDescriptor build_gamma() {
  ModelDescriptor m;
  m.id = "gamma";
  m.dim = 2;
  m.in_domain = [](const CoordVector& x) {
    if (x.values.size() != 2 || !all_finite(x.values)) return false;
    if (x.chart == Chart::theta) return x.values[0] < 0.0 && x.values[1] > -1.0;
    return x.values[0] > 0.0 && x.values[1] < std::log(x.values[0]);
  };
  m.psi = [](std::span<const double> t) {
    const GammaParams p = gamma_params_of_theta(t);
    if (!(p.beta > 0.0) || !(p.nu > 0.0)) throw DomainError("gamma: requires beta > 0, nu > 0");
    return std::lgamma(p.nu) - p.nu * std::log(p.beta);
  };
  m.psi_star = [](std::span<const double> e) {
    const GammaParams p = gamma_params_of_eta(e);
    return -p.nu + (p.nu - 1.0) * digamma(p.nu) + std::log(p.beta) - std::lgamma(p.nu);
  };
  m.eta_of_theta = [](std::span<const double> t) {
    const GammaParams p = gamma_params_of_theta(t);
    if (!(p.beta > 0.0) || !(p.nu > 0.0)) throw DomainError("gamma: requires beta > 0, nu > 0");
    return std::vector<double>{p.nu / p.beta, digamma(p.nu) - std::log(p.beta)};
  };
  m.theta_of_eta = [](std::span<const double> e) {
    const GammaParams p = gamma_params_of_eta(e);
    return std::vector<double>{-p.beta, p.nu - 1.0};
  };
  m.metric_lower_eta = [](std::span<const double> e) {
    const GammaParams p = gamma_params_of_eta(e);
    return gamma_lower_bn(p.beta, p.nu);
  };
  m.metric_upper_theta = [](std::span<const double> t) {
    const GammaParams p = gamma_params_of_theta(t);
    if (!(p.beta > 0.0) || !(p.nu > 0.0)) throw DomainError("gamma: requires beta > 0, nu > 0");
    return gamma_upper_bn(p.beta, p.nu);
  };
  m.metric_lower_eta_grad_fn = [](std::span<const double> e) {
    const GammaParams p = gamma_params_of_eta(e);
    return gamma_lower_grad_eta(p.beta, p.nu);
  };
  m.metric_upper_theta_grad_fn = [](std::span<const double> t) {
    const GammaParams p = gamma_params_of_theta(t);
    if (!(p.beta > 0.0) || !(p.nu > 0.0)) throw DomainError("gamma: requires beta > 0, nu > 0");
    return gamma_upper_grad_theta(p.beta, p.nu);
  };
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Finite exponential family.

double FiniteExpFamily::psi(std::span<const double> theta) const {
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> dots(alphabet_size);
  for (int x = 0; x < alphabet_size; ++x) {
    dots[x] = dot(theta, stats[x]);
    mx = std::max(mx, dots[x]);
  }
  double s = 0.0;
  for (int x = 0; x < alphabet_size; ++x) s += std::exp(dots[x] - mx);
  return mx + std::log(s);
}

std::vector<double> FiniteExpFamily::probabilities(std::span<const double> theta) const {
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> dots(alphabet_size);
  for (int x = 0; x < alphabet_size; ++x) {
    dots[x] = dot(theta, stats[x]);
    mx = std::max(mx, dots[x]);
  }
  std::vector<double> p(alphabet_size);
  double s = 0.0;
  for (int x = 0; x < alphabet_size; ++x) {
    p[x] = std::exp(dots[x] - mx);
    s += p[x];
  }
  for (double& v : p) v /= s;
  return p;
}

std::vector<double> FiniteExpFamily::mean_stats(std::span<const double> theta) const {
  const std::vector<double> p = probabilities(theta);
  std::vector<double> eta(dim, 0.0);
  for (int x = 0; x < alphabet_size; ++x)
    for (int i = 0; i < dim; ++i) eta[i] += p[x] * stats[x][i];
  return eta;
}

MetricMatrix FiniteExpFamily::covariance(std::span<const double> theta) const {
  const std::vector<double> p = probabilities(theta);
  std::vector<double> eta(dim, 0.0);
  for (int x = 0; x < alphabet_size; ++x)
    for (int i = 0; i < dim; ++i) eta[i] += p[x] * stats[x][i];
  MetricMatrix g(dim);
  for (int x = 0; x < alphabet_size; ++x)
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        g(i, j) += p[x] * (stats[x][i] - eta[i]) * (stats[x][j] - eta[j]);
  return g;
}

std::vector<double> FiniteExpFamily::solve_theta(std::span<const double> eta) const {
  // Minimize Psi(theta) - theta . eta (convex); gradient is eta(theta) - eta.
  std::vector<double> theta(dim, 0.0);
  const double scale = std::max(1.0, max_abs(eta));
  for (int it = 0; it < 200; ++it) {
    const std::vector<double> mean = mean_stats(theta);
    std::vector<double> grad(dim);
    for (int i = 0; i < dim; ++i) grad[i] = mean[i] - eta[i];
    if (max_abs(grad) <= 1e-13 * scale) return theta;

    MetricMatrix lower;
    const MetricMatrix cov = covariance(theta);
    if (!cholesky(cov, lower))
      throw DomainError("finite family: singular covariance during Newton solve");
    // Solve cov * step = grad.
    std::vector<double> y(dim), step(dim);
    for (int i = 0; i < dim; ++i) {
      double s = grad[i];
      for (int k = 0; k < i; ++k) s -= lower(i, k) * y[k];
      y[i] = s / lower(i, i);
    }
    for (int i = dim - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < dim; ++k) s -= lower(k, i) * step[k];
      step[i] = s / lower(i, i);
    }

    const double f0 = psi(theta) - dot(theta, eta);
    double t = 1.0;
    std::vector<double> cand(dim);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < dim; ++i) cand[i] = theta[i] - t * step[i];
      const double f1 = psi(cand) - dot(cand, eta);
      if (std::isfinite(f1) && f1 <= f0 + 1e-12 * std::abs(f0)) {
        theta = cand;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) throw DomainError("finite family: eta is not in the open mean domain");
  }
  throw DomainError("finite family: Newton solve for theta did not converge");
}

std::shared_ptr<const FiniteExpFamily> make_finite_family(
    std::vector<std::vector<double>> stats) {
  const int k = static_cast<int>(stats.size());
  if (k < 2) throw IdentifiabilityError("finite family needs at least 2 outcomes");
  const int m = static_cast<int>(stats[0].size());
  if (m < 1) throw IdentifiabilityError("finite family needs at least 1 statistic");
  for (const auto& row : stats) {
    if (static_cast<int>(row.size()) != m)
      throw IdentifiabilityError("finite family: ragged stats matrix");
    if (!all_finite(row)) throw IdentifiabilityError("finite family: non-finite statistic");
  }
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (max_abs_diff(stats[a], stats[b]) < 1e-14)
        throw IdentifiabilityError("finite family: duplicate outcomes " + std::to_string(a) +
                                   " and " + std::to_string(b));
  // Columns of [1 F] must be linearly independent: Gram-Schmidt over K-vectors.
  if (k < m + 1)
    throw IdentifiabilityError("finite family: too few outcomes for the statistic dimension");
  std::vector<std::vector<double>> basis;
  auto add_column = [&](std::vector<double> col) {
    double norm0 = std::sqrt(dot(col, col));
    for (const auto& b : basis) {
      const double c = dot(col, b);
      for (int x = 0; x < k; ++x) col[x] -= c * b[x];
    }
    const double norm = std::sqrt(dot(col, col));
    if (norm <= 1e-10 * std::max(1.0, norm0)) return false;
    for (double& v : col) v /= norm;
    basis.push_back(std::move(col));
    return true;
  };
  if (!add_column(std::vector<double>(k, 1.0)))
    throw IdentifiabilityError("finite family: degenerate constant column");
  for (int i = 0; i < m; ++i) {
    std::vector<double> col(k);
    for (int x = 0; x < k; ++x) col[x] = stats[x][i];
    if (!add_column(std::move(col)))
      throw IdentifiabilityError(
          "finite family: statistic " + std::to_string(i) +
          " is linearly dependent on the constant and earlier statistics");
  }

  auto fam = std::make_shared<FiniteExpFamily>();
  fam->alphabet_size = k;
  fam->dim = m;
  fam->stats = std::move(stats);
  return fam;
}

ModelDescriptor finite_exp_family(std::shared_ptr<const FiniteExpFamily> family) {
  ModelDescriptor m;
  m.id = "finite";
  m.dim = family->dim;
  m.finite_family = family;
  m.in_domain = [family](const CoordVector& x) {
    if (static_cast<int>(x.values.size()) != family->dim || !all_finite(x.values)) return false;
    if (x.chart == Chart::theta) return true;
    try {
      family->solve_theta(x.values);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  m.psi = [family](std::span<const double> t) { return family->psi(t); };
  m.psi_star = [family](std::span<const double> e) {
    const std::vector<double> t = family->solve_theta(e);
    return dot(t, e) - family->psi(t);
  };
  m.eta_of_theta = [family](std::span<const double> t) { return family->mean_stats(t); };
  m.theta_of_eta = [family](std::span<const double> e) { return family->solve_theta(e); };
  m.metric_lower_eta = [family](std::span<const double> e) {
    return family->covariance(family->solve_theta(e));
  };
  m.metric_upper_theta = [family](std::span<const double> t) {
    return inverse_spd(family->covariance(t));
  };
  // Metric derivatives fall back to central differences.
  return m;
}

ModelDescriptor finite_exp_family(std::vector<std::vector<double>> stats) {
  return finite_exp_family(make_finite_family(std::move(stats)));
}

// ---------------------------------------------------------------------------

ModelDescriptor gaussian_model() { return build_gaussian(); }
ModelDescriptor gamma_model() { return build_gamma(); }

ModelDescriptor model_by_id(const std::string& id) {
  if (id == "gaussian") return gaussian_model();
  if (id == "gamma") return gamma_model();
  if (id.rfind("finite:", 0) == 0) {
    const std::string path = id.substr(7);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open finite-family file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
    if (!j.contains("stats") || !j["stats"].is_array())
      throw ConfigError("finite-family file must contain a \"stats\" array");
    std::vector<std::vector<double>> stats;
    for (const auto& row : j["stats"]) stats.push_back(row.get<std::vector<double>>());
    ModelDescriptor m = finite_exp_family(std::move(stats));
    m.id = id;
    return m;
  }
  throw UnknownModelError("unknown model '" + id + "'");
}

std::vector<std::string> builtin_model_ids() { return {"gaussian", "gamma", "finite:<path>"}; }

CoordVector eta_of(const GaussianParams& p) {
  return eta_vec({p.mu, p.mu * p.mu + p.sigma2});
}

CoordVector theta_of(const GaussianParams& p) {
  return theta_vec({p.mu / p.sigma2, -0.5 / p.sigma2});
}

GaussianParams gaussian_params_of_eta(std::span<const double> eta) {
  return GaussianParams{eta[0], eta[1] - eta[0] * eta[0]};
}

CoordVector eta_of(const GammaParams& p) {
  return eta_vec({p.nu / p.beta, digamma(p.nu) - std::log(p.beta)});
}

CoordVector theta_of(const GammaParams& p) { return theta_vec({-p.beta, p.nu - 1.0}); }

GammaParams gamma_params_of_eta(std::span<const double> eta) {
  const double nu = gamma_nu_from_eta(eta[0], eta[1]);
  return GammaParams{nu / eta[0], nu};
}

double gamma_nu_from_eta(double eta1, double eta2) {
  if (!(eta1 > 0.0)) throw DomainError("gamma: eta_1 must be positive");
  const double rhs = eta2 - std::log(eta1);
  if (!(rhs < 0.0)) throw DomainError("gamma: requires eta_2 < ln eta_1");
  // f(nu) = digamma(nu) - ln nu - rhs is strictly increasing from -inf to -rhs.
  auto f = [rhs](double nu) { return digamma(nu) - std::log(nu) - rhs; };
  double guess = (rhs < -1.0) ? -1.0 / rhs : -0.5 / rhs;
  double lo = guess, hi = guess;
  while (f(lo) > 0.0) {
    lo *= 0.5;
    if (lo < 1e-300) throw DomainError("gamma: eta inversion failed (nu underflow)");
  }
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw DomainError("gamma: eta inversion failed (nu overflow)");
  }
  double nu = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double fv = f(nu);
    if (fv > 0.0) hi = nu; else lo = nu;
    const double dfv = trigamma(nu) - 1.0 / nu;
    double next = nu - fv / dfv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - nu) <= 1e-14 * std::max(1.0, std::abs(next))) return next;
    nu = next;
  }
  return nu;
}

double refractive_index(const ModelDescriptor& m, const CoordVector& x) {
  require_in_domain(m, x);
  const double n2 = (x.chart == Chart::eta) ? n2_eta(m, x.values) : n2_theta(m, x.values);
  if (!(n2 > 0.0)) throw DomainError("refractive index is not positive at this point");
  return std::sqrt(n2);
}

double n2_eta(const ModelDescriptor& m, std::span<const double> eta) {
  const std::vector<double> theta = m.theta_of_eta(eta);
  return quad_form(m.metric_lower_eta(eta), theta, theta);
}

std::vector<double> n2_grad_eta(const ModelDescriptor& m, std::span<const double> eta) {
  const std::vector<double> theta = m.theta_of_eta(eta);
  const std::vector<MetricMatrix> dg = metric_lower_eta_grad(m, eta);
  std::vector<double> out(m.dim);
  for (int i = 0; i < m.dim; ++i) out[i] = quad_form(dg[i], theta, theta) + 2.0 * theta[i];
  return out;
}

double n2_theta(const ModelDescriptor& m, std::span<const double> theta) {
  const std::vector<double> eta = m.eta_of_theta(theta);
  return quad_form(m.metric_upper_theta(theta), eta, eta);
}

std::vector<double> n2_grad_theta(const ModelDescriptor& m, std::span<const double> theta) {
  const std::vector<double> eta = m.eta_of_theta(theta);
  const std::vector<MetricMatrix> dg = metric_upper_theta_grad(m, theta);
  std::vector<double> out(m.dim);
  for (int i = 0; i < m.dim; ++i) out[i] = quad_form(dg[i], eta, eta) + 2.0 * eta[i];
  return out;
}

}  // namespace igflow
