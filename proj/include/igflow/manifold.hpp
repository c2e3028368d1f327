#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "igflow/linalg.hpp"

namespace igflow {

enum class Chart { theta, eta };

const char* chart_name(Chart c);

/// An m-vector tagged with the chart it lives in.
struct CoordVector {
  Chart chart = Chart::eta;
  std::vector<double> values;
};

inline CoordVector theta_vec(std::vector<double> v) { return {Chart::theta, std::move(v)}; }
inline CoordVector eta_vec(std::vector<double> v) { return {Chart::eta, std::move(v)}; }

struct FiniteExpFamily;  // defined in models.hpp

/// A dually flat manifold: Legendre-paired potentials, mutually inverse
/// coordinate maps, and the metric in both charts.
///
/// Conventions: theta^i = dPsi*/d eta_i and eta_i = dPsi/d theta^i;
/// g_ij(eta) and g^ij(theta) are the Jacobians of the two maps, so their
/// product is the identity at corresponding points.
struct ModelDescriptor {
  std::string id;
  int dim = 0;

  std::function<double(std::span<const double>)> psi;       // Psi(theta)
  std::function<double(std::span<const double>)> psi_star;  // Psi*(eta)
  std::function<std::vector<double>(std::span<const double>)> eta_of_theta;
  std::function<std::vector<double>(std::span<const double>)> theta_of_eta;
  std::function<MetricMatrix(std::span<const double>)> metric_lower_eta;    // g_ij(eta)
  std::function<MetricMatrix(std::span<const double>)> metric_upper_theta;  // g^ij(theta)
  std::function<bool(const CoordVector&)> in_domain;

  // Optional analytic metric derivatives (one matrix per coordinate).
  // Flow code falls back to central differences when these are absent.
  std::function<std::vector<MetricMatrix>(std::span<const double>)> metric_lower_eta_grad_fn;
  std::function<std::vector<MetricMatrix>(std::span<const double>)> metric_upper_theta_grad_fn;

  // Set only for finite exponential families.
  std::shared_ptr<const FiniteExpFamily> finite_family;
};

void require_in_domain(const ModelDescriptor& m, const CoordVector& x);

/// Dual-chart coordinates of x; the chart tag is flipped.
CoordVector coord_map(const ModelDescriptor& m, const CoordVector& x);

/// g_ij(eta) for an eta-chart point, g^ij(theta) for a theta-chart point.
/// The result is validated (symmetric positive definite).
MetricMatrix metric_at(const ModelDescriptor& m, const CoordVector& x);

/// |Psi(theta) + Psi*(eta(theta)) - theta . eta(theta)|
double legendre_residual(const ModelDescriptor& m, const CoordVector& theta);

/// max_{i,k} |g^ij(theta(x)) g_jk(eta(x)) - delta^i_k|
double metric_duality_residual(const ModelDescriptor& m, const CoordVector& x);

/// Max component error between central finite differences of the potential
/// (Psi* in the eta chart, Psi in the theta chart) and the analytic dual map.
double fd_gradient_check(const ModelDescriptor& m, const CoordVector& x, double h);

/// Analytic derivative pack when present, otherwise central differences
/// with step 1e-6 * max(1, |x_i|).
std::vector<MetricMatrix> metric_lower_eta_grad(const ModelDescriptor& m,
                                                std::span<const double> eta);
std::vector<MetricMatrix> metric_upper_theta_grad(const ModelDescriptor& m,
                                                  std::span<const double> theta);

}  // namespace igflow
