#pragma once

#include <iosfwd>
#include <string>

#include "igflow/dynamics.hpp"
#include "igflow/optics.hpp"
#include "igflow/replicator.hpp"

namespace igflow {

/// Shortest representation that round-trips the double exactly (<= 17
/// significant digits).
std::string format_shortest(double v);

/// Fixed 17-significant-digit form used in CSV files.
std::string format_g17(double v);

/// Header t,s,tau,theta_1..theta_m,eta_1..eta_m; one row per sample.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_json(std::ostream& os, const Trajectory& traj);

/// Header t,s,tau,q_1..q_m,p_1..p_m.
void write_ray_csv(std::ostream& os, const RayTrajectory& traj);
void write_ray_json(std::ostream& os, const RayTrajectory& traj);

/// Trajectory columns plus the direct-route probabilities p_1..p_K.
void write_replicator_csv(std::ostream& os, const ReplicatorRun& run);
void write_replicator_json(std::ostream& os, const ReplicatorRun& run);

}  // namespace igflow
