#pragma once

#include <memory>
#include <string>
#include <vector>

#include "igflow/manifold.hpp"

namespace igflow {

struct GaussianParams {
  double mu = 0.0;
  double sigma2 = 1.0;  // variance, > 0
};

struct GammaParams {
  double beta = 1.0;  // inverse scale, > 0
  double nu = 1.0;    // shape, > 0
};

/// Exponential family over a finite alphabet of K outcomes with sufficient
/// statistics F_k(x). Expectations are exact finite sums.
struct FiniteExpFamily {
  int alphabet_size = 0;                   // K
  int dim = 0;                             // m
  std::vector<std::vector<double>> stats;  // K rows, m entries each

  double psi(std::span<const double> theta) const;  // log sum_x exp(theta . F(x))
  std::vector<double> probabilities(std::span<const double> theta) const;
  std::vector<double> mean_stats(std::span<const double> theta) const;  // eta(theta)
  MetricMatrix covariance(std::span<const double> theta) const;        // Cov_theta F
  /// Inverse of mean_stats by damped Newton; DomainError if eta is not in
  /// the open mean domain.
  std::vector<double> solve_theta(std::span<const double> eta) const;
};

/// Validates shape, duplicate outcomes and identifiability, then shares
/// ownership of the family.
std::shared_ptr<const FiniteExpFamily> make_finite_family(
    std::vector<std::vector<double>> stats);

ModelDescriptor gaussian_model();
ModelDescriptor gamma_model();
ModelDescriptor finite_exp_family(std::vector<std::vector<double>> stats);
ModelDescriptor finite_exp_family(std::shared_ptr<const FiniteExpFamily> family);

/// "gaussian", "gamma", or "finite:<path to JSON {\"stats\":[[...],...]}>".
ModelDescriptor model_by_id(const std::string& id);
std::vector<std::string> builtin_model_ids();

CoordVector eta_of(const GaussianParams& p);
CoordVector theta_of(const GaussianParams& p);
GaussianParams gaussian_params_of_eta(std::span<const double> eta);

CoordVector eta_of(const GammaParams& p);
CoordVector theta_of(const GammaParams& p);
GammaParams gamma_params_of_eta(std::span<const double> eta);

/// Solves digamma(nu) - ln nu = eta_2 - ln eta_1 for nu (Newton with a
/// bisection safeguard, tolerance 1e-12 relative).
double gamma_nu_from_eta(double eta1, double eta2);

/// n(eta) = sqrt(g_ij(eta) theta^i theta^j) in the eta chart,
/// n*(theta) = sqrt(g^ij(theta) eta_i eta_j) in the theta chart.
double refractive_index(const ModelDescriptor& m, const CoordVector& x);

/// Squared index and its gradient as functions on one chart. The gradient
/// uses the exact contraction d(n^2)/d eta_i = dg_jk/d eta_i theta^j theta^k
/// + 2 theta^i (and its theta-chart mirror).
double n2_eta(const ModelDescriptor& m, std::span<const double> eta);
std::vector<double> n2_grad_eta(const ModelDescriptor& m, std::span<const double> eta);
double n2_theta(const ModelDescriptor& m, std::span<const double> theta);
std::vector<double> n2_grad_theta(const ModelDescriptor& m, std::span<const double> theta);

}  // namespace igflow
