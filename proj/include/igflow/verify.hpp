#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "igflow/dynamics.hpp"
#include "igflow/manifold.hpp"

namespace igflow {

struct CheckReport {
  std::string check_id;
  std::string model;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string details;
};

/// Runs every applicable invariant against the model at seeded random domain
/// points. Deterministic for a fixed seed; checks never abort the suite (a
/// throwing check is reported as failed).
std::vector<CheckReport> run_suite(const ModelDescriptor& model, const std::string& label,
                                   std::uint64_t seed, const IntegratorConfig& cfg);
std::vector<CheckReport> run_suite(const std::string& model_id, std::uint64_t seed,
                                   const IntegratorConfig& cfg);

/// Verifies the model's closed-form dt relation along a trajectory:
/// t - ln sigma^2 constant (gaussian eta-chart flow), t + ln beta constant
/// (gamma eta-chart flow), t - ln mu constant (gaussian theta-chart flow).
CheckReport time_map_check(const std::string& model_id, const Trajectory& traj);

/// For a gaussian theta-chart gradient flow: checks the growth law
/// eta_i(t) = eta_i(0) e^t and the relation d sigma/sigma =
/// (1 - mu^2/sigma^2)/2 * d mu/mu between consecutive samples.
CheckReport second_set_gaussian_check(const Trajectory& traj);

void write_reports_jsonl(std::ostream& os, const std::vector<CheckReport>& reports);
bool all_pass(const std::vector<CheckReport>& reports);

}  // namespace igflow
