#include "igflow/io.hpp"

#include <charconv>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace igflow {

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

namespace {

nlohmann::ordered_json driver_json(const DriverInfo& d) {
  nlohmann::ordered_json j;
  j["kind"] = d.kind;
  j["model"] = d.model;
  j["energy"] = d.energy;
  return j;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,s,tau";
  for (int i = 1; i <= traj.dim; ++i) os << ",theta_" << i;
  for (int i = 1; i <= traj.dim; ++i) os << ",eta_" << i;
  os << "\n";
  for (const FlowSample& smp : traj.samples) {
    os << format_g17(smp.t) << ',' << format_g17(smp.s) << ',' << format_g17(smp.tau);
    for (int i = 0; i < traj.dim; ++i) os << ',' << format_g17(smp.theta[i]);
    for (int i = 0; i < traj.dim; ++i) os << ',' << format_g17(smp.eta[i]);
    os << "\n";
  }
}

void write_trajectory_json(std::ostream& os, const Trajectory& traj) {
  nlohmann::ordered_json j;
  j["driver"] = driver_json(traj.driver);
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (const FlowSample& smp : traj.samples) {
    nlohmann::ordered_json row;
    row["t"] = smp.t;
    row["s"] = smp.s;
    row["tau"] = smp.tau;
    row["theta"] = smp.theta;
    row["eta"] = smp.eta;
    samples.push_back(std::move(row));
  }
  j["samples"] = std::move(samples);
  os << j.dump() << "\n";
}

void write_ray_csv(std::ostream& os, const RayTrajectory& traj) {
  os << "t,s,tau";
  for (int i = 1; i <= traj.dim; ++i) os << ",q_" << i;
  for (int i = 1; i <= traj.dim; ++i) os << ",p_" << i;
  os << "\n";
  for (const RaySample& smp : traj.samples) {
    os << format_g17(smp.t) << ',' << format_g17(smp.s) << ',' << format_g17(smp.tau);
    for (int i = 0; i < traj.dim; ++i) os << ',' << format_g17(smp.q[i]);
    for (int i = 0; i < traj.dim; ++i) os << ',' << format_g17(smp.p[i]);
    os << "\n";
  }
}

void write_ray_json(std::ostream& os, const RayTrajectory& traj) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json driver;
  driver["kind"] = std::string("ray_") + flow_param_name(traj.param);
  driver["field"] = traj.field_id;
  j["driver"] = std::move(driver);
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (const RaySample& smp : traj.samples) {
    nlohmann::ordered_json row;
    row["t"] = smp.t;
    row["s"] = smp.s;
    row["tau"] = smp.tau;
    row["q"] = smp.q;
    row["p"] = smp.p;
    samples.push_back(std::move(row));
  }
  j["samples"] = std::move(samples);
  os << j.dump() << "\n";
}

void write_replicator_csv(std::ostream& os, const ReplicatorRun& run) {
  const Trajectory& traj = run.ig_trajectory;
  const int k = run.p_direct.empty() ? 0 : static_cast<int>(run.p_direct.front().probs.size());
  os << "t,s,tau";
  for (int i = 1; i <= traj.dim; ++i) os << ",theta_" << i;
  for (int i = 1; i <= traj.dim; ++i) os << ",eta_" << i;
  for (int i = 1; i <= k; ++i) os << ",p_" << i;
  os << "\n";
  for (std::size_t row = 0; row < traj.samples.size(); ++row) {
    const FlowSample& smp = traj.samples[row];
    os << format_g17(smp.t) << ',' << format_g17(smp.s) << ',' << format_g17(smp.tau);
    for (int i = 0; i < traj.dim; ++i) os << ',' << format_g17(smp.theta[i]);
    for (int i = 0; i < traj.dim; ++i) os << ',' << format_g17(smp.eta[i]);
    for (int i = 0; i < k; ++i) os << ',' << format_g17(run.p_direct[row].probs[i]);
    os << "\n";
  }
}

void write_replicator_json(std::ostream& os, const ReplicatorRun& run) {
  nlohmann::ordered_json j;
  j["driver"] = driver_json(run.ig_trajectory.driver);
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (std::size_t row = 0; row < run.ig_trajectory.samples.size(); ++row) {
    const FlowSample& smp = run.ig_trajectory.samples[row];
    nlohmann::ordered_json rec;
    rec["t"] = smp.t;
    rec["s"] = smp.s;
    rec["tau"] = smp.tau;
    rec["theta"] = smp.theta;
    rec["eta"] = smp.eta;
    rec["p"] = run.p_direct[row].probs;
    samples.push_back(std::move(rec));
  }
  j["samples"] = std::move(samples);
  os << j.dump() << "\n";
}

}  // namespace igflow
