#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "igflow/errors.hpp"

namespace igflow {

enum class IntegratorMethod { rk4_fixed, rkf45_adaptive };
enum class DomainGuard { stop_with_error, truncate_trajectory };
enum class FlowStatus { complete, domain_exit };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::rk4_fixed;
  double step = 1e-3;      // fixed-step size / initial adaptive step
  double abs_tol = 1e-9;   // rkf45 only
  double rel_tol = 1e-9;   // rkf45 only
  long max_steps = 2000000;
  DomainGuard domain_guard = DomainGuard::stop_with_error;
};

using OdeRhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

struct OdeResult {
  std::vector<double> u;
  std::vector<std::vector<double>> y;
  FlowStatus status = FlowStatus::complete;
};

/// Integrates y' = f(u, y) over the span, sampling every accepted step.
/// A zero-length span yields the initial sample only. The rhs signals a
/// domain violation by throwing DomainError (or producing non-finite
/// derivatives); depending on cfg.domain_guard the result is truncated at
/// the last good sample or a DomainExitError is thrown.
OdeResult integrate_ode(const OdeRhs& rhs, std::vector<double> y0,
                        std::pair<double, double> span, const IntegratorConfig& cfg);

}  // namespace igflow
