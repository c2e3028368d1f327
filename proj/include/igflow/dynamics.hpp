#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "igflow/integrate.hpp"
#include "igflow/manifold.hpp"
#include "igflow/models.hpp"

namespace igflow {

struct RefractiveField;  // optics.hpp

enum class FlowParam { t, s, tau };

const char* flow_param_name(FlowParam p);

/// One flow sample carrying all three time parameters and the state in both
/// charts. Model-free linear flows fill only their own chart and use the
/// convention s = tau = t.
struct FlowSample {
  double t = 0.0;
  double s = 0.0;
  double tau = 0.0;
  std::vector<double> theta;
  std::vector<double> eta;
};

struct DriverInfo {
  std::string kind;   // "gradient_eta", "geodesic_theta", "natural_ig", ...
  std::string model;  // model id, empty for model-free flows
  double energy = 0.0;
};

struct Trajectory {
  DriverInfo driver;
  IntegratorConfig config;
  FlowStatus status = FlowStatus::complete;
  int dim = 0;
  std::vector<FlowSample> samples;
};

enum class HamiltonianKind {
  geodesic_eta,
  geodesic_theta,
  natural_ig,
  natural_optics,
  geodesic_optics  // JM image of natural_optics; integrated by ray_trace in tau
};

const char* hamiltonian_kind_name(HamiltonianKind k);

/// Which Hamiltonian drives a flow plus its energy/potential data.
/// For the natural kinds, `potential` overrides the default potential used
/// by the Jacobi-Maupertuis transform: -n(q) for natural_optics (first-order
/// kinetic term) and -n^2(eta) for natural_ig (quadratic kinetic term, with
/// the factor 2 of the classical transform folded in).
struct HamiltonianSpec {
  HamiltonianKind kind = HamiltonianKind::geodesic_eta;
  std::shared_ptr<const ModelDescriptor> model;
  std::shared_ptr<const RefractiveField> field;
  double energy = 0.0;
  std::function<double(std::span<const double>)> potential;
};

HamiltonianSpec geodesic_eta_spec(std::shared_ptr<const ModelDescriptor> model);
HamiltonianSpec geodesic_theta_spec(std::shared_ptr<const ModelDescriptor> model);
HamiltonianSpec natural_ig_spec(std::shared_ptr<const ModelDescriptor> model, double energy = 0.0);

/// Phase-space state (position eta, momentum-like theta).
struct PhaseState {
  std::vector<double> eta;
  std::vector<double> theta;
};

/// theta := theta(eta), which puts the geodesic Hamiltonian on its unit
/// level set at the start of a flow.
PhaseState consistent_state(const ModelDescriptor& m, const CoordVector& x0);

/// Natural-gradient flow of the chart's potential. The eta chart integrates
/// d eta_i/dt = -g_ij(eta) theta^j(eta); the theta chart integrates
/// d theta^i/dt = +g^ij(theta) eta_j(theta). The s and tau columns follow
/// ds = n dt, dtau = n^2 dt (n* in the theta chart).
Trajectory gradient_flow(const ModelDescriptor& m, const CoordVector& x0,
                         std::pair<double, double> t_span, const IntegratorConfig& cfg);

/// Exact solution of the linearized flows: theta-chart points decay e^{-t},
/// eta-chart points grow e^{t}.
CoordVector linear_flow_closed_form(const CoordVector& x0, double t);

/// The same linear laws integrated as actual flows (model-free).
Trajectory linear_flow(const CoordVector& x0, std::pair<double, double> t_span,
                       const IntegratorConfig& cfg);

/// Geodesic Hamiltonian flow in the arc-length-like parameter tau of the
/// conformally rescaled metric (lower/n^2 for the eta kind, upper/n*^2 for
/// the theta kind). The quadratic form it conserves is recorded per sample
/// through the returned trajectory's charts.
Trajectory geodesic_flow(const HamiltonianSpec& spec, const PhaseState& state0,
                         std::pair<double, double> tau_span, const IntegratorConfig& cfg);

/// The same motion driven in the gradient-flow time t by the natural
/// Hamiltonian (metric kinetic term plus -n^2/2 potential).
Trajectory natural_flow_t(const HamiltonianSpec& spec, const PhaseState& state0,
                          std::pair<double, double> t_span, const IntegratorConfig& cfg);

/// Value of the geodesic Hamiltonian sqrt(g~ theta theta) (eta kind) or
/// sqrt(g~* eta eta) (theta kind) at a phase point.
double geodesic_hamiltonian(const HamiltonianSpec& spec, const PhaseState& state);

/// Value of the natural Hamiltonian (1/2) g_jk theta^j theta^k - (1/2) n^2(eta).
double natural_hamiltonian(const HamiltonianSpec& spec, const PhaseState& state);

/// Jacobi-Maupertuis transform of a natural Hamiltonian at fixed energy E.
/// The conformal factor is lambda = E - U; the momentum-space metric is
/// divided by lambda^2 for the first-order optics kind and by lambda for the
/// quadratic IG kind, and the new parameter satisfies dtau = lambda d(base),
/// base being s (optics) or t (IG). Accessors throw TurningPointError where
/// lambda <= 0.
struct JmTransformResult {
  HamiltonianSpec geodesic;
  std::function<double(std::span<const double>)> dtau_dbase;          // lambda(x)
  std::function<MetricMatrix(std::span<const double>)> metric_lower;  // transformed g_ij
  std::function<MetricMatrix(std::span<const double>)> metric_upper;  // transformed g^ij
};

JmTransformResult jm_transform(const HamiltonianSpec& natural, double energy);

/// Resamples onto a uniform grid of the target parameter. The target column
/// is rebuilt from the source one by trapezoidal quadrature of the
/// ds = n dt, dtau = n^2 dt relations (n* for theta-side drivers), and all
/// state columns are moved over by monotone cubic interpolation.
Trajectory reparametrize(const Trajectory& traj, FlowParam from, FlowParam to,
                         const ModelDescriptor& m);

/// Interpolated samples of an existing trajectory at given parameter values.
std::vector<FlowSample> sample_at(const Trajectory& traj, FlowParam param,
                                  std::span<const double> grid);

/// c_i(t) = theta^i(t) eta_i(t) (no summation) on a shared t grid; constant
/// along paired linear flows.
std::vector<std::vector<double>> integrability_products(const Trajectory& theta_traj,
                                                        const Trajectory& eta_traj);

double param_value(const FlowSample& s, FlowParam p);

}  // namespace igflow
