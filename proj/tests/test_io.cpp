#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "igflow/io.hpp"
#include "igflow/models.hpp"

using namespace igflow;

TEST_CASE("number formatting") {
  CHECK(format_shortest(0.5) == "0.5");
  CHECK(format_shortest(3.0) == "3");
  // shortest form always round-trips
  for (double v : {std::log(2.0), 1.0 / 3.0, 6.02214076e23, -1.6e-35}) {
    CHECK(std::strtod(format_shortest(v).c_str(), nullptr) == v);
    CHECK(std::strtod(format_g17(v).c_str(), nullptr) == v);
  }
  CHECK(format_shortest(std::log(2.0)).size() <= 19);  // <= 17 significant digits
}

TEST_CASE("trajectory CSV header and round-trip precision") {
  const ModelDescriptor m = gaussian_model();
  const Trajectory traj =
      gradient_flow(m, eta_of(GaussianParams{1.0, 1.0}), {0.0, 0.01}, IntegratorConfig{});
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,s,tau,theta_1,theta_2,eta_1,eta_2");

  // first data row parses back to the exact doubles
  std::string row;
  std::getline(in, row);
  std::getline(in, row);  // second sample
  std::stringstream ss(row);
  std::string cell;
  std::vector<double> values;
  while (std::getline(ss, cell, ',')) values.push_back(std::strtod(cell.c_str(), nullptr));
  REQUIRE(values.size() == 7);
  const FlowSample& smp = traj.samples[1];
  CHECK(values[0] == smp.t);
  CHECK(values[1] == smp.s);
  CHECK(values[2] == smp.tau);
  CHECK(values[3] == smp.theta[0]);
  CHECK(values[5] == smp.eta[0]);
}

TEST_CASE("trajectory JSON structure") {
  const ModelDescriptor m = gaussian_model();
  const Trajectory traj =
      gradient_flow(m, eta_of(GaussianParams{0.0, 1.0}), {0.0, 0.002}, IntegratorConfig{});
  std::ostringstream os;
  write_trajectory_json(os, traj);
  const nlohmann::json j = nlohmann::json::parse(os.str());
  CHECK(j.contains("driver"));
  CHECK(j.contains("samples"));
  CHECK(j["driver"]["kind"] == "gradient_eta");
  CHECK(j["driver"]["model"] == "gaussian");
  REQUIRE(j["samples"].size() == traj.samples.size());
  CHECK(j["samples"][0]["theta"].size() == 2);
  CHECK(j["samples"][0]["eta"].size() == 2);
  CHECK(j["samples"][0].contains("t"));
  CHECK(j["samples"][0].contains("s"));
  CHECK(j["samples"][0].contains("tau"));
}

TEST_CASE("ray CSV header") {
  const RefractiveField field = homogeneous_field(2, 1.0);
  const RayTrajectory ray = ray_trace(field, {{0.0, 0.0}, {1.0, 0.0}}, FlowParam::s,
                                      {0.0, 0.01}, IntegratorConfig{});
  std::ostringstream os;
  write_ray_csv(os, ray);
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,s,tau,q_1,q_2,p_1,p_2");
}

TEST_CASE("replicator CSV carries probability columns") {
  const auto fam = make_finite_family({{0.0}, {1.0}});
  const ReplicatorRun run =
      simulate_replicator(*fam, std::vector<double>{1.0}, {0.0, 0.01}, IntegratorConfig{});
  std::ostringstream os;
  write_replicator_csv(os, run);
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,s,tau,theta_1,eta_1,p_1,p_2");
}

TEST_CASE("export is byte-identical across repeated runs") {
  const ModelDescriptor m = gamma_model();
  auto render = [&] {
    const Trajectory traj =
        gradient_flow(m, eta_of(GammaParams{2.0, 3.0}), {0.0, 0.1}, IntegratorConfig{});
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    write_trajectory_json(os, traj);
    return os.str();
  };
  CHECK(render() == render());
}
