// End-to-end tests that drive the installed CLI binary through a shell.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int g_counter = 0;

CmdResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string tag = "igflow_cli_test_" + std::to_string(g_counter++);
  const std::string out_path = "/tmp/" + tag + ".out";
  const std::string err_path = "/tmp/" + tag + ".err";
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(IGFLOW_CLI_PATH) + " " +
                          args + " >" + out_path + " 2>" + err_path;
  const int rc = std::system(cmd.c_str());
  CmdResult res;
  res.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  res.out = slurp(out_path);
  res.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return res;
}

std::vector<double> last_csv_row(const std::string& path) {
  std::ifstream in(path);
  std::string line, last;
  std::getline(in, line);  // header
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  std::vector<double> values;
  std::stringstream ss(last);
  std::string cell;
  while (std::getline(ss, cell, ',')) values.push_back(std::strtod(cell.c_str(), nullptr));
  return values;
}

const char* kLn2 = "0:0.69314718055994531";

}  // namespace

TEST_CASE("simulate: gaussian gradient flow closed form") {
  const std::string out = "/tmp/igflow_cli_gauss.csv";
  const CmdResult res = run_cli("simulate --model gaussian --flow gradient_eta --mu 1 "
                                "--sigma2 1 --t " + std::string(kLn2) + " --out " + out);
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("samples=") == 0);
  const std::vector<double> row = last_csv_row(out);
  REQUIRE(row.size() == 7);
  CHECK(std::abs(row[5] - 1.0) < 1e-6);  // eta_1
  CHECK(std::abs(row[6] - 3.0) < 1e-6);  // eta_2
  std::remove(out.c_str());
}

TEST_CASE("simulate: gamma gradient flow closed form") {
  const std::string out = "/tmp/igflow_cli_gamma.csv";
  const CmdResult res = run_cli("simulate --model gamma --flow gradient_eta --beta 2 --nu 3 "
                                "--t " + std::string(kLn2) + " --out " + out);
  REQUIRE(res.exit_code == 0);
  const std::vector<double> row = last_csv_row(out);
  // theta = (-beta, nu - 1) -> (-1, 1)
  CHECK(std::abs(row[3] + 1.0) < 1e-6);
  CHECK(std::abs(row[4] - 1.0) < 1e-6);
  std::remove(out.c_str());
}

TEST_CASE("simulate: negative variance is a config error") {
  const CmdResult res =
      run_cli("simulate --model gaussian --flow gradient_eta --mu 0 --sigma2 -1 --t 0:1");
  CHECK(res.exit_code == 2);
  CHECK(res.err.rfind("error:", 0) == 0);
  CHECK(res.err.find("sigma2") != std::string::npos);
}

TEST_CASE("simulate: domain exit with truncation writes partial output and exits 3") {
  const std::string out = "/tmp/igflow_cli_exit.csv";
  const CmdResult res = run_cli("simulate --model gaussian --flow gradient_theta --mu 1 "
                                "--sigma2 4 --t 0:3 --guard truncate --out " + out);
  CHECK(res.exit_code == 3);
  CHECK(res.out.find("status=domain_exit") != std::string::npos);
  const std::vector<double> row = last_csv_row(out);
  REQUIRE(row.size() == 7);
  CHECK(std::abs(row[0] - std::log(5.0)) < 0.05);  // exits near t = ln 5
  std::remove(out.c_str());

  const CmdResult thrown = run_cli("simulate --model gaussian --flow gradient_theta --mu 1 "
                                   "--sigma2 4 --t 0:3");
  CHECK(thrown.exit_code == 3);
  CHECK(thrown.err.rfind("error:", 0) == 0);
}

TEST_CASE("simulate: geodesic, natural, ray and replicator flows run") {
  CHECK(run_cli("simulate --model gaussian --flow geodesic --mu 0 --sigma2 1 --tau 0:0.5")
            .exit_code == 0);
  CHECK(run_cli("simulate --model gaussian --flow geodesic --chart theta --mu 1 --sigma2 4 "
                "--tau 0:0.2 --method rkf45")
            .exit_code == 0);
  CHECK(run_cli("simulate --model gamma --flow natural --beta 2 --nu 3 --t 0:0.5")
            .exit_code == 0);

  {
    std::ofstream f("/tmp/igflow_cli_field.json");
    f << R"({"kind":"linear","n0":1.0,"slope":[0.1,0.0]})";
  }
  const CmdResult ray = run_cli("simulate --flow ray --field /tmp/igflow_cli_field.json "
                                "--q 0,0 --p 0.7071,0.7071 --s 0:1");
  CHECK(ray.exit_code == 0);
  CHECK(ray.out.find("momentum_drift=") != std::string::npos);
  std::remove("/tmp/igflow_cli_field.json");

  {
    std::ofstream f("/tmp/igflow_cli_family.json");
    f << R"({"stats": [[0.0], [1.0]]})";
  }
  const CmdResult rep = run_cli("simulate --model finite:/tmp/igflow_cli_family.json "
                                "--flow replicator --theta 1 --t 0:1");
  CHECK(rep.exit_code == 0);
  CHECK(rep.out.find("two_route_drift=") != std::string::npos);
  std::remove("/tmp/igflow_cli_family.json");
}

TEST_CASE("verify: exit codes and report shape") {
  const CmdResult ok = run_cli("verify --model gaussian --seed 1");
  CHECK(ok.exit_code == 0);
  std::istringstream lines(ok.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.contains("check_id"));
    CHECK(j.contains("model"));
    CHECK(j.contains("residual"));
    CHECK(j.contains("tolerance"));
    CHECK(j.contains("pass"));
    CHECK(j.contains("details"));
    CHECK(j["pass"].get<bool>());
    ++count;
  }
  CHECK(count >= 13);

  CHECK(run_cli("verify --model gamma --seed 1").exit_code == 0);
  const CmdResult unknown = run_cli("verify --model unknown");
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.err.rfind("error:", 0) == 0);
}

TEST_CASE("verify: IGFLOW_SEED environment variable sets the default seed") {
  const CmdResult by_flag = run_cli("verify --model gaussian --seed 7");
  const CmdResult by_env = run_cli("verify --model gaussian", "IGFLOW_SEED=7");
  CHECK(by_flag.out == by_env.out);
  const CmdResult other = run_cli("verify --model gaussian --seed 9");
  CHECK(by_flag.out != other.out);
}

TEST_CASE("convert: both charts plus potentials and indices") {
  const CmdResult res = run_cli("convert --model gaussian --eta 0,1");
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("theta = 0,-0.5\n") != std::string::npos);
  CHECK(res.out.find("n = 0.7071067811865476\n") != std::string::npos);

  const CmdResult gam = run_cli("convert --model gamma --params beta=1,nu=1");
  REQUIRE(gam.exit_code == 0);
  // nu = 1 gives n = 1; the value passes through one Newton inversion, so
  // compare numerically rather than textually
  const auto pos = gam.out.find("\nn = ");
  REQUIRE(pos != std::string::npos);
  const double n_value = std::strtod(gam.out.c_str() + pos + 5, nullptr);
  CHECK(std::abs(n_value - 1.0) < 1e-12);
  CHECK(gam.out.find("theta = -1,0\n") != std::string::npos);

  const CmdResult bad = run_cli("convert --model gaussian --eta 1,0.5");
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.rfind("error:", 0) == 0);
}

TEST_CASE("json output format and theta-chart convert") {
  const std::string out = "/tmp/igflow_cli_json.json";
  const CmdResult res = run_cli("simulate --model gaussian --flow gradient_eta --mu 0 "
                                "--sigma2 1 --t 0:0.1 --format json --out " + out);
  REQUIRE(res.exit_code == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j["driver"]["kind"] == "gradient_eta");
  CHECK(j["samples"].size() == 101);
  std::remove(out.c_str());

  const CmdResult conv = run_cli("convert --model gamma --theta -2,2");
  REQUIRE(conv.exit_code == 0);
  CHECK(conv.out.find("theta = -2,2\n") != std::string::npos);
  CHECK(conv.out.find("eta = 1.5,") != std::string::npos);  // eta_1 = nu/beta = 3/2
}

TEST_CASE("models subcommand lists the builtins") {
  const CmdResult res = run_cli("models");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("gaussian") != std::string::npos);
  CHECK(res.out.find("gamma") != std::string::npos);
  CHECK(res.out.find("finite:<path>") != std::string::npos);
}

TEST_CASE("output is byte-identical for identical invocations") {
  const std::string a = "/tmp/igflow_cli_det_a.csv";
  const std::string b = "/tmp/igflow_cli_det_b.csv";
  const std::string args = "simulate --model gamma --flow gradient_eta --beta 2 --nu 3 "
                           "--t 0:0.25 --out ";
  REQUIRE(run_cli(args + a).exit_code == 0);
  REQUIRE(run_cli(args + b).exit_code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(!slurp(a).empty());
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST_CASE("config file values are used and flags win") {
  const std::string cfg_path = "/tmp/igflow_cli_cfg.ini";
  const std::string out = "/tmp/igflow_cli_cfg.csv";
  {
    std::ofstream f(cfg_path);
    f << "[simulate]\n"
      << "model=gaussian\n"
      << "flow=gradient_eta\n"
      << "mu=1\n"
      << "sigma2=1\n"
      << "t=0:0.5\n";
  }
  const CmdResult from_cfg =
      run_cli("--config " + cfg_path + " simulate --out " + out);
  REQUIRE(from_cfg.exit_code == 0);
  const std::vector<double> row = last_csv_row(out);
  CHECK(std::abs(row[6] - (1.0 + std::exp(0.5))) < 1e-6);  // sigma2 = 1 from config

  const CmdResult overridden =
      run_cli("--config " + cfg_path + " simulate --sigma2 2 --out " + out);
  REQUIRE(overridden.exit_code == 0);
  const std::vector<double> row2 = last_csv_row(out);
  CHECK(std::abs(row2[6] - (1.0 + 2.0 * std::exp(0.5))) < 1e-6);  // flag wins
  std::remove(cfg_path.c_str());
  std::remove(out.c_str());
}
