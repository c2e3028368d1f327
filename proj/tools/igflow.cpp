// Command-line front end: run simulations, run the verification suite,
// convert coordinates, and emit trajectory/report files.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "igflow/dynamics.hpp"
#include "igflow/io.hpp"
#include "igflow/models.hpp"
#include "igflow/optics.hpp"
#include "igflow/replicator.hpp"
#include "igflow/verify.hpp"

namespace {

using namespace igflow;

std::pair<double, double> parse_span(const std::string& text) {
  const auto pos = text.find(':');
  if (pos == std::string::npos)
    throw ConfigError("span must be <start>:<end>, got '" + text + "'");
  try {
    return {std::stod(text.substr(0, pos)), std::stod(text.substr(pos + 1))};
  } catch (const std::exception&) {
    throw ConfigError("cannot parse span '" + text + "'");
  }
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty vector '" + text + "'");
  return out;
}

std::string join_values(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_shortest(v[i]);
  }
  return out;
}

struct SimulateOptions {
  std::string model_id;
  std::string flow;
  std::string chart = "eta";
  std::string t_span, s_span, tau_span;
  std::string eta_text, theta_text, q_text, p_text;
  std::string field_path;
  double mu = 0.0, sigma2 = 0.0, beta = 0.0, nu = 0.0;
  bool has_mu = false, has_sigma2 = false, has_beta = false, has_nu = false;
  std::string method = "rk4";
  double step = 1e-3;
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  long max_steps = 2000000;
  std::string guard = "stop";
  std::string out = "-";
  std::string format = "csv";
};

IntegratorConfig make_config(const SimulateOptions& o) {
  IntegratorConfig cfg;
  if (o.method == "rk4") cfg.method = IntegratorMethod::rk4_fixed;
  else if (o.method == "rkf45") cfg.method = IntegratorMethod::rkf45_adaptive;
  else throw ConfigError("unknown method '" + o.method + "' (rk4 | rkf45)");
  cfg.step = o.step;
  cfg.abs_tol = o.abs_tol;
  cfg.rel_tol = o.rel_tol;
  cfg.max_steps = o.max_steps;
  if (o.guard == "stop") cfg.domain_guard = DomainGuard::stop_with_error;
  else if (o.guard == "truncate") cfg.domain_guard = DomainGuard::truncate_trajectory;
  else throw ConfigError("unknown guard '" + o.guard + "' (stop | truncate)");
  return cfg;
}

// Initial point in the requested chart from whichever of --eta/--theta/model
// parameters was given.
CoordVector resolve_start(const ModelDescriptor& model, const SimulateOptions& o, Chart chart) {
  int given = 0;
  given += !o.eta_text.empty();
  given += !o.theta_text.empty();
  given += (o.has_mu || o.has_sigma2 || o.has_beta || o.has_nu) ? 1 : 0;
  if (given != 1)
    throw ConfigError("give exactly one initial state: --eta, --theta, or model parameters");

  CoordVector start;
  if (!o.eta_text.empty()) {
    start = eta_vec(parse_vector(o.eta_text));
  } else if (!o.theta_text.empty()) {
    start = theta_vec(parse_vector(o.theta_text));
  } else if (o.has_mu || o.has_sigma2) {
    if (!(o.has_mu && o.has_sigma2)) throw ConfigError("gaussian start needs --mu and --sigma2");
    if (!(o.sigma2 > 0.0))
      throw ConfigError("domain violation: sigma2 must be positive (got " +
                        format_shortest(o.sigma2) + ")");
    start = eta_of(GaussianParams{o.mu, o.sigma2});
  } else {
    if (!(o.has_beta && o.has_nu)) throw ConfigError("gamma start needs --beta and --nu");
    if (!(o.beta > 0.0) || !(o.nu > 0.0))
      throw ConfigError("domain violation: beta and nu must be positive");
    start = eta_of(GammaParams{o.beta, o.nu});
  }
  if (start.chart == chart) return start;
  return coord_map(model, start);
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
}

int finish_flow(const SimulateOptions& o, const Trajectory& traj, const std::string& drift_name,
                double drift) {
  std::ostringstream body;
  if (o.format == "csv") write_trajectory_csv(body, traj);
  else if (o.format == "json") write_trajectory_json(body, traj);
  else throw ConfigError("unknown format '" + o.format + "' (csv | json)");
  write_text(o.out, body.str());

  const FlowSample& last = traj.samples.back();
  std::cout << "samples=" << traj.samples.size() << " final_eta=" << join_values(last.eta)
            << " final_theta=" << join_values(last.theta) << ' ' << drift_name << '='
            << format_shortest(drift);
  if (traj.status == FlowStatus::domain_exit) std::cout << " status=domain_exit";
  std::cout << "\n";
  return traj.status == FlowStatus::domain_exit ? 3 : 0;
}

int cmd_simulate(const SimulateOptions& o) {
  const IntegratorConfig cfg = make_config(o);

  if (o.flow == "ray") {
    if (o.field_path.empty()) throw ConfigError("--flow ray needs --field <file>");
    if (o.q_text.empty() || o.p_text.empty()) throw ConfigError("--flow ray needs --q and --p");
    const RefractiveField field = load_field(o.field_path);
    const RayState state{parse_vector(o.q_text), parse_vector(o.p_text)};
    FlowParam param;
    std::pair<double, double> span;
    if (!o.s_span.empty()) { param = FlowParam::s; span = parse_span(o.s_span); }
    else if (!o.tau_span.empty()) { param = FlowParam::tau; span = parse_span(o.tau_span); }
    else if (!o.t_span.empty()) { param = FlowParam::t; span = parse_span(o.t_span); }
    else throw ConfigError("--flow ray needs one of --s, --tau, --t");
    const RayTrajectory ray = ray_trace(field, state, param, span, cfg);
    std::ostringstream body;
    if (o.format == "csv") write_ray_csv(body, ray);
    else if (o.format == "json") write_ray_json(body, ray);
    else throw ConfigError("unknown format '" + o.format + "' (csv | json)");
    write_text(o.out, body.str());
    const RayConservation cons = ray_conservation_check(ray, field);
    const RaySample& last = ray.samples.back();
    std::cout << "samples=" << ray.samples.size() << " final_q=" << join_values(last.q)
              << " final_p=" << join_values(last.p)
              << " momentum_drift=" << format_shortest(cons.momentum_norm_residual);
    if (ray.status == FlowStatus::domain_exit) std::cout << " status=domain_exit";
    std::cout << "\n";
    return ray.status == FlowStatus::domain_exit ? 3 : 0;
  }

  const ModelDescriptor model = model_by_id(o.model_id);
  const auto model_ptr = std::make_shared<const ModelDescriptor>(model);

  if (o.flow == "replicator") {
    if (!model.finite_family)
      throw ConfigError("--flow replicator needs a finite model (finite:<path>)");
    if (o.theta_text.empty()) throw ConfigError("--flow replicator needs --theta");
    if (o.t_span.empty()) throw ConfigError("--flow replicator needs --t <a:b>");
    const ReplicatorRun run = simulate_replicator(*model.finite_family,
                                                  parse_vector(o.theta_text),
                                                  parse_span(o.t_span), cfg);
    std::ostringstream body;
    if (o.format == "csv") write_replicator_csv(body, run);
    else if (o.format == "json") write_replicator_json(body, run);
    else throw ConfigError("unknown format '" + o.format + "' (csv | json)");
    write_text(o.out, body.str());
    std::cout << "samples=" << run.t.size()
              << " final_p=" << join_values(run.p_direct.back().probs)
              << " two_route_drift=" << format_shortest(run.max_route_difference) << "\n";
    return 0;
  }

  if (o.flow == "gradient_eta" || o.flow == "gradient_theta") {
    if (o.t_span.empty()) throw ConfigError("gradient flows need --t <a:b>");
    const Chart chart = (o.flow == "gradient_eta") ? Chart::eta : Chart::theta;
    const CoordVector x0 = resolve_start(model, o, chart);
    const Trajectory traj = gradient_flow(model, x0, parse_span(o.t_span), cfg);
    // Drift against the linearized law in the dual chart.
    double drift = 0.0;
    const FlowSample& first = traj.samples.front();
    for (const FlowSample& smp : traj.samples) {
      if (chart == Chart::eta) {
        const double f = std::exp(-smp.t + first.t);
        for (std::size_t i = 0; i < smp.theta.size(); ++i)
          drift = std::max(drift, std::abs(smp.theta[i] - first.theta[i] * f));
      } else {
        const double f = std::exp(smp.t - first.t);
        for (std::size_t i = 0; i < smp.eta.size(); ++i)
          drift = std::max(drift, std::abs(smp.eta[i] - first.eta[i] * f));
      }
    }
    return finish_flow(o, traj, "linearization_drift", drift);
  }

  if (o.flow == "geodesic" || o.flow == "natural") {
    Chart chart = Chart::eta;
    if (o.chart == "theta") chart = Chart::theta;
    else if (o.chart != "eta") throw ConfigError("--chart must be eta or theta");
    const CoordVector x0 = resolve_start(model, o, chart);
    const PhaseState st0 = consistent_state(model, x0);
    if (o.flow == "geodesic") {
      if (o.tau_span.empty()) throw ConfigError("--flow geodesic needs --tau <a:b>");
      const HamiltonianSpec spec = (chart == Chart::eta) ? geodesic_eta_spec(model_ptr)
                                                         : geodesic_theta_spec(model_ptr);
      const Trajectory traj = geodesic_flow(spec, st0, parse_span(o.tau_span), cfg);
      double drift = 0.0;
      const double h0 = geodesic_hamiltonian(spec, st0);
      for (const FlowSample& smp : traj.samples)
        drift = std::max(drift,
                         std::abs(geodesic_hamiltonian(spec, {smp.eta, smp.theta}) - h0));
      return finish_flow(o, traj, "hamiltonian_drift", drift);
    }
    if (o.t_span.empty()) throw ConfigError("--flow natural needs --t <a:b>");
    const HamiltonianSpec spec = natural_ig_spec(model_ptr);
    const Trajectory traj = natural_flow_t(spec, st0, parse_span(o.t_span), cfg);
    double drift = 0.0;
    const double h0 = natural_hamiltonian(spec, st0);
    for (const FlowSample& smp : traj.samples)
      drift = std::max(drift, std::abs(natural_hamiltonian(spec, {smp.eta, smp.theta}) - h0));
    return finish_flow(o, traj, "hamiltonian_drift", drift);
  }

  throw ConfigError("unknown flow '" + o.flow +
                    "' (gradient_eta | gradient_theta | geodesic | natural | ray | replicator)");
}

int cmd_verify(const std::string& model_id, std::uint64_t seed, const std::string& out_path) {
  const std::vector<CheckReport> reports = run_suite(model_id, seed, IntegratorConfig{});
  std::ostringstream body;
  write_reports_jsonl(body, reports);
  write_text(out_path, body.str());
  if (out_path != "-") {
    std::size_t failed = 0;
    for (const CheckReport& r : reports)
      if (!r.pass) ++failed;
    std::cout << "checks=" << reports.size() << " failed=" << failed << "\n";
  }
  return all_pass(reports) ? 0 : 1;
}

int cmd_convert(const std::string& model_id, const std::string& eta_text,
                const std::string& theta_text, const std::string& params_text) {
  const ModelDescriptor model = model_by_id(model_id);
  int given = !eta_text.empty();
  given += !theta_text.empty();
  given += !params_text.empty();
  if (given != 1) throw ConfigError("give exactly one of --eta, --theta, --params");

  CoordVector x;
  CoordVector paired;  // exact dual chart when params give both closed forms
  bool have_pair = false;
  if (!eta_text.empty()) {
    x = eta_vec(parse_vector(eta_text));
  } else if (!theta_text.empty()) {
    x = theta_vec(parse_vector(theta_text));
  } else {
    double mu = 0, sigma2 = 0, beta = 0, nu = 0;
    bool has_mu = false, has_sigma2 = false, has_beta = false, has_nu = false;
    std::stringstream ss(params_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto pos = item.find('=');
      if (pos == std::string::npos) throw ConfigError("--params must be key=value pairs");
      const std::string key = item.substr(0, pos);
      double value = 0;
      try {
        value = std::stod(item.substr(pos + 1));
      } catch (const std::exception&) {
        throw ConfigError("cannot parse value in '" + item + "'");
      }
      if (key == "mu") { mu = value; has_mu = true; }
      else if (key == "sigma2") { sigma2 = value; has_sigma2 = true; }
      else if (key == "beta") { beta = value; has_beta = true; }
      else if (key == "nu") { nu = value; has_nu = true; }
      else throw ConfigError("unknown parameter '" + key + "'");
    }
    if (has_mu && has_sigma2) {
      if (!(sigma2 > 0.0)) throw ConfigError("domain violation: sigma2 must be positive");
      x = eta_of(GaussianParams{mu, sigma2});
      paired = theta_of(GaussianParams{mu, sigma2});
      have_pair = true;
    } else if (has_beta && has_nu) {
      if (!(beta > 0.0) || !(nu > 0.0))
        throw ConfigError("domain violation: beta and nu must be positive");
      x = eta_of(GammaParams{beta, nu});
      paired = theta_of(GammaParams{beta, nu});
      have_pair = true;
    } else {
      throw ConfigError("--params needs mu=..,sigma2=.. or beta=..,nu=..");
    }
  }

  const CoordVector theta = (x.chart == Chart::theta) ? x : (have_pair ? paired : coord_map(model, x));
  const CoordVector eta = (x.chart == Chart::eta) ? x : coord_map(model, x);
  std::cout << "theta = " << join_values(theta.values) << "\n"
            << "eta = " << join_values(eta.values) << "\n"
            << "psi = " << format_shortest(model.psi(theta.values)) << "\n"
            << "psi_star = " << format_shortest(model.psi_star(eta.values)) << "\n"
            << "n = " << format_shortest(refractive_index(model, eta)) << "\n"
            << "n_star = " << format_shortest(refractive_index(model, theta)) << "\n";
  return 0;
}

int cmd_models() {
  std::cout << "gaussian        normal distributions N(mu, sigma^2)\n"
            << "gamma           gamma distributions (beta, nu)\n"
            << "finite:<path>   finite exponential family from JSON {\"stats\": [[...],...]}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"information-geometry flows: gradient, geodesic and ray dynamics"};
  app.set_config("--config", "", "key=value config file; sections name subcommands");
  app.require_subcommand(0, 1);

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "integrate a flow and write a trajectory");
  simulate->add_option("--model", sim.model_id, "model id (see `igflow models`)");
  simulate->add_option("--flow", sim.flow,
                       "gradient_eta | gradient_theta | geodesic | natural | ray | replicator")
      ->required();
  simulate->add_option("--chart", sim.chart, "chart for geodesic/natural starts (eta | theta)");
  simulate->add_option("--t", sim.t_span, "t span <a:b>");
  simulate->add_option("--s", sim.s_span, "s span <a:b> (rays)");
  simulate->add_option("--tau", sim.tau_span, "tau span <a:b>");
  simulate->add_option("--mu", sim.mu, "gaussian mean")->each([&](const std::string&) { sim.has_mu = true; });
  simulate->add_option("--sigma2", sim.sigma2, "gaussian variance")->each([&](const std::string&) { sim.has_sigma2 = true; });
  simulate->add_option("--beta", sim.beta, "gamma inverse scale")->each([&](const std::string&) { sim.has_beta = true; });
  simulate->add_option("--nu", sim.nu, "gamma shape")->each([&](const std::string&) { sim.has_nu = true; });
  simulate->add_option("--eta", sim.eta_text, "initial eta coordinates <v,v,...>");
  simulate->add_option("--theta", sim.theta_text, "initial theta coordinates <v,v,...>");
  simulate->add_option("--q", sim.q_text, "initial ray position <v,v,...>");
  simulate->add_option("--p", sim.p_text, "initial ray momentum <v,v,...>");
  simulate->add_option("--field", sim.field_path, "refractive field JSON file (rays)");
  simulate->add_option("--method", sim.method, "rk4 | rkf45");
  simulate->add_option("--step", sim.step, "fixed step size");
  simulate->add_option("--abs-tol", sim.abs_tol, "rkf45 absolute tolerance");
  simulate->add_option("--rel-tol", sim.rel_tol, "rkf45 relative tolerance");
  simulate->add_option("--max-steps", sim.max_steps, "step limit");
  simulate->add_option("--guard", sim.guard, "domain guard: stop | truncate");
  simulate->add_option("--out", sim.out, "output path or - for stdout");
  simulate->add_option("--format", sim.format, "csv | json");

  std::string verify_model;
  std::uint64_t verify_seed = 1;
  std::string verify_out = "-";
  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite for a model");
  verify->add_option("--model", verify_model, "model id")->required();
  verify->add_option("--seed", verify_seed, "seed for the random domain points")
      ->envname("IGFLOW_SEED");
  verify->add_option("--out", verify_out, "report path or - for stdout");

  std::string convert_model, convert_eta, convert_theta, convert_params;
  CLI::App* convert = app.add_subcommand("convert", "print both charts and potentials at a point");
  convert->add_option("--model", convert_model, "model id")->required();
  convert->add_option("--eta", convert_eta, "eta coordinates <v,v,...>");
  convert->add_option("--theta", convert_theta, "theta coordinates <v,v,...>");
  convert->add_option("--params", convert_params, "model parameters k=v,k=v");

  CLI::App* models = app.add_subcommand("models", "list built-in models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (verify->parsed()) return cmd_verify(verify_model, verify_seed, verify_out);
    if (convert->parsed()) return cmd_convert(convert_model, convert_eta, convert_theta,
                                              convert_params);
    if (models->parsed()) return cmd_models();
    std::cout << app.help();
    return 0;
  } catch (const DomainExitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
