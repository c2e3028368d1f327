#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "igflow/dynamics.hpp"
#include "igflow/linalg.hpp"

namespace igflow {

/// An optics medium: position-dependent index n(q) > 0 and metric g_ij(q).
/// Null metric means Euclidean; null gradients fall back to central
/// differences with step 1e-6 * max(1, |q_i|).
struct RefractiveField {
  int dim = 0;
  std::string id = "custom";
  std::function<double(std::span<const double>)> index;
  std::function<std::vector<double>(std::span<const double>)> index_grad;
  std::function<MetricMatrix(std::span<const double>)> metric;
  std::function<std::vector<MetricMatrix>(std::span<const double>)> metric_grad;
  std::function<bool(std::span<const double>)> domain;
};

RefractiveField homogeneous_field(int dim, double n);
/// n(q) = n0 + slope . q
RefractiveField linear_field(double n0, std::vector<double> slope);
/// n(q) = n0 + coeff * |q|^2
RefractiveField radial_field(int dim, double n0, double coeff);

/// {"kind":"homogeneous"|"linear"|"radial", ...} from a JSON file.
RefractiveField load_field(const std::string& path);
RefractiveField field_from_json_text(const std::string& text);

/// The model manifold seen as an optics medium in the eta chart: position
/// q = eta, field metric g_ij(q) = inverse of the model's g_ij(eta) (so the
/// field's upper metric matches the model's lower one), n(q) = n(eta).
/// Rays with p = -theta then reproduce the model flows.
RefractiveField field_from_model(std::shared_ptr<const ModelDescriptor> model);

struct RayState {
  std::vector<double> q;
  std::vector<double> p;  // canonical momentum
};

struct RaySample {
  double t = 0.0;
  double s = 0.0;
  double tau = 0.0;
  std::vector<double> q;
  std::vector<double> p;
};

struct RayTrajectory {
  std::string field_id;
  FlowParam param = FlowParam::s;
  IntegratorConfig config;
  FlowStatus status = FlowStatus::complete;
  int dim = 0;
  std::vector<RaySample> samples;
};

/// Traces a ray in the chosen parametrization: arc length s (first-order
/// Hamiltonian sqrt(g^jk p_j p_k) - n), JM parameter tau (geodesic
/// Hamiltonian of g^jk/n^2), or gradient-flow time t (natural Hamiltonian
/// g^jk p_j p_k / 2 - n^2/2). The other two parameter columns follow
/// dtau = n ds = n^2 dt.
RayTrajectory ray_trace(const RefractiveField& field, const RayState& state0, FlowParam param,
                        std::pair<double, double> span, const IntegratorConfig& cfg);

/// max over interior samples of |d/ds(n dq/ds) - grad n| via central
/// differences; the trajectory must be s-parametrized.
double eikonal_residual(const RayTrajectory& traj, const RefractiveField& field);

struct RayConservation {
  double momentum_norm_residual = 0.0;  // max |sqrt(g^jk p_j p_k) - n(q)|
  double energy_residual = 0.0;         // max |H(q, p)| for the s-Hamiltonian
};

RayConservation ray_conservation_check(const RayTrajectory& traj, const RefractiveField& field);

RayTrajectory reparametrize(const RayTrajectory& traj, FlowParam from, FlowParam to,
                            const RefractiveField& field);

std::vector<RaySample> sample_ray_at(const RayTrajectory& traj, FlowParam param,
                                     std::span<const double> grid);

double ray_param_value(const RaySample& s, FlowParam p);

/// Momentum norm sqrt(g^jk(q) p_j p_k) in the field metric.
double momentum_norm(const RefractiveField& field, std::span<const double> q,
                     std::span<const double> p);

HamiltonianSpec natural_optics_spec(std::shared_ptr<const RefractiveField> field,
                                    double energy = 0.0);

}  // namespace igflow
