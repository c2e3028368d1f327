#pragma once

#include <utility>
#include <vector>

#include "igflow/dynamics.hpp"
#include "igflow/models.hpp"

namespace igflow {

/// A point on the probability simplex.
struct ProbabilityVector {
  std::vector<double> probs;
};

/// Entries nonnegative (within slack) and summing to one within 1e-12.
void validate_probability(const ProbabilityVector& p, double slack = 1e-12);

/// Right side -p(x) (ln p(x) - E_p[ln p]) per outcome; components sum to 0.
std::vector<double> replicator_rhs(const FiniteExpFamily& family,
                                   std::span<const double> theta);

/// Max pointwise difference between dp/dt from the exponential-family chain
/// rule with d theta/dt = -theta substituted and the replicator right side.
/// Exact equivalence predicts zero.
double equivalence_residual(const FiniteExpFamily& family, std::span<const double> theta);

struct ReplicatorRun {
  std::vector<double> t;
  std::vector<std::vector<double>> theta;       // theta0 e^{-t}
  std::vector<ProbabilityVector> p_direct;      // simplex integration of the replicator ODE
  std::vector<ProbabilityVector> p_from_theta;  // p_{theta(t)}
  double max_route_difference = 0.0;
  double max_renormalization = 0.0;  // largest |sum p - 1| absorbed per step
  Trajectory ig_trajectory;          // (t, s, tau, theta, eta) via the family model
};

/// Evolves theta(t) = theta0 e^{-t} alongside a direct fixed-step RK4
/// integration of the replicator equation on the simplex (renormalized after
/// each step); the two probability routes are compared pointwise.
ReplicatorRun simulate_replicator(const FiniteExpFamily& family, std::span<const double> theta0,
                                  std::pair<double, double> t_span, const IntegratorConfig& cfg);

}  // namespace igflow
