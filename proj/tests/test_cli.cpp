#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "optpot/cli.hpp"

using namespace optpot;
using namespace optpot::cli;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("optpot_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(OPTPOT_BIN) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string strip_wall_time(const std::string& report_json) {
  auto doc = nlohmann::ordered_json::parse(report_json);
  doc.erase("wall_time_seconds");
  return doc.dump(2);
}

}  // namespace

TEST_CASE("validate_config happy path and pi literals") {
  const RunConfig cfg = validate_config(R"({
    "mode": "forward", "L": "pi", "n": 2000,
    "potential": {"kind": "zero"}, "m": 3
  })");
  CHECK(cfg.mode == Mode::Forward);
  CHECK(cfg.L == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(cfg.n == 2000);
  CHECK(cfg.m == 3);

  const RunConfig cfg2 = validate_config(R"({
    "mode": "inverse", "L": "2pi", "n": 100,
    "potential": {"kind": "constant", "value": "0.5pi"}, "m": 1,
    "targets": [2.5], "seed": 9
  })");
  CHECK(cfg2.L == doctest::Approx(2.0 * kPi).epsilon(1e-15));
  CHECK(std::get<ConstantPotential>(cfg2.potential).value ==
        doctest::Approx(0.5 * kPi).epsilon(1e-15));
  CHECK(cfg2.seed == 9);
}

TEST_CASE("validate_config rejections carry the reason") {
  auto rejects = [](const std::string& body, const std::string& needle) {
    try {
      validate_config(body);
      return false;
    } catch (const ConfigError& err) {
      return std::string(err.what()).find(needle) != std::string::npos;
    }
  };
  CHECK(rejects(R"({"mode":"inverse","L":3,"potential":{"kind":"zero"},"m":2,"targets":[5,2]})",
                "strictly increasing"));
  CHECK(rejects(R"({"mode":"inverse","L":3,"potential":{"kind":"zero"},"m":1})", "targets"));
  CHECK(rejects(R"({"mode":"forward","L":3,"potential":{"kind":"zero"},"m":1,"targets":[2]})",
                "forward"));
  CHECK(rejects(R"({"mode":"sideways","L":3,"potential":{"kind":"zero"},"m":1})", "mode"));
  CHECK(rejects(R"({"mode":"forward","L":-1,"potential":{"kind":"zero"},"m":1})", "positive"));
  CHECK(rejects(R"({"mode":"forward","L":3,"n":5,"potential":{"kind":"zero"},"m":9})", "exceeds"));
  CHECK(rejects(R"({"mode":"forward","L":3,"potential":{"kind":"wiggly"},"m":1})", "kind"));
  CHECK(rejects("{not json", "parse error"));
  CHECK(rejects(R"({"mode":"forward","L":"3tau","potential":{"kind":"zero"},"m":1})", "pi"));
}

TEST_CASE("forward run emits eigenvalues and artifacts") {
  TempDir tmp;
  RunConfig cfg = validate_config(R"({
    "mode": "forward", "L": "pi", "n": 500,
    "potential": {"kind": "zero"}, "m": 3
  })");
  cfg.output_dir = (tmp.path / "fwd").string();
  const RunReport report = run(cfg);

  const Grid g = make_grid(kPi, 500);
  for (int k = 1; k <= 3; ++k) {
    const double bound = std::pow(static_cast<double>(k), 4) * g.h() * g.h() / 6.0;
    CHECK(std::abs(report.v0_eigenvalues[static_cast<std::size_t>(k - 1)] -
                   static_cast<double>(k) * k) <= bound);
  }
  CHECK(fs::exists(tmp.path / "fwd" / "report.json"));
  CHECK(fs::exists(tmp.path / "fwd" / "potential.csv"));
  CHECK(fs::exists(tmp.path / "fwd" / "eigenfunctions.csv"));
  CHECK(!fs::exists(tmp.path / "fwd" / "u_hat.csv"));

  const std::string csv = slurp(tmp.path / "fwd" / "potential.csv");
  CHECK(csv.substr(0, 5) == "x,v0\n");
}

TEST_CASE("inverse run round-trips through the emitted potential") {
  TempDir tmp;
  RunConfig inv = validate_config(R"({
    "mode": "inverse", "L": "pi", "n": 500,
    "potential": {"kind": "zero"}, "m": 1, "targets": [2]
  })");
  inv.output_dir = (tmp.path / "inv").string();
  const RunReport inv_report = run(inv);
  CHECK(inv_report.solution.has_value());
  CHECK(fs::exists(tmp.path / "inv" / "u_hat.csv"));
  CHECK(fs::exists(tmp.path / "inv" / "sigma.json"));

  const auto sigma = nlohmann::json::parse(slurp(tmp.path / "inv" / "sigma.json"));
  CHECK(sigma.is_array());
  CHECK(sigma.size() == 1);
  CHECK(sigma[0].get<int>() == -1);

  RunConfig fwd = validate_config(R"({
    "mode": "forward", "L": "pi", "n": 500,
    "potential": {"kind": "zero"}, "m": 1
  })");
  fwd.potential = SamplesPotential{(tmp.path / "inv" / "potential.csv").string()};
  fwd.output_dir = (tmp.path / "rt").string();
  const RunReport fwd_report = run(fwd);
  CHECK(std::abs(fwd_report.v0_eigenvalues[0] - 2.0) <= 1e-8);
}

TEST_CASE("reports are byte-identical modulo wall time") {
  TempDir tmp;
  RunConfig cfg = validate_config(R"({
    "mode": "inverse", "L": "pi", "n": 300,
    "potential": {"kind": "zero"}, "m": 1, "targets": [1.5]
  })");
  cfg.output_dir = (tmp.path / "a").string();
  run(cfg);
  cfg.output_dir = (tmp.path / "b").string();
  run(cfg);

  std::string a = slurp(tmp.path / "a" / "report.json");
  std::string b = slurp(tmp.path / "b" / "report.json");
  // output_dir differs inside the config echo; normalize it away
  auto da = nlohmann::ordered_json::parse(a);
  auto db = nlohmann::ordered_json::parse(b);
  da["config"].erase("output_dir");
  db["config"].erase("output_dir");
  da.erase("wall_time_seconds");
  db.erase("wall_time_seconds");
  CHECK(da.dump(2) == db.dump(2));

  // same directory, two runs: identical bytes except the wall-time field
  cfg.output_dir = (tmp.path / "c").string();
  run(cfg);
  const std::string c1 = slurp(tmp.path / "c" / "report.json");
  run(cfg);
  const std::string c2 = slurp(tmp.path / "c" / "report.json");
  CHECK(strip_wall_time(c1) == strip_wall_time(c2));
}

TEST_CASE("binary exit codes follow the contract") {
  TempDir tmp;

  const fs::path good = tmp.path / "good.json";
  std::ofstream(good) << R"({"mode":"forward","L":"pi","n":120,"potential":{"kind":"zero"},"m":2,)"
                      << R"("output_dir":")" << (tmp.path / "out").string() << R"("})";
  CHECK(run_binary("--config " + good.string() + " --quiet") == 0);

  const fs::path bad = tmp.path / "bad.json";
  std::ofstream(bad) << R"({"mode":"inverse","L":"pi","n":120,"potential":{"kind":"zero"},"m":2,"targets":[5,2]})";
  CHECK(run_binary("--config " + bad.string()) == 1);

  CHECK(run_binary("--config " + (tmp.path / "missing.json").string()) == 1);

  const fs::path stuck = tmp.path / "stuck.json";
  std::ofstream(stuck) << R"({"mode":"inverse","L":"pi","n":120,"potential":{"kind":"zero"},"m":1,)"
                       << R"("targets":[50],"solver":{"scf_max_iter":8,"newton_max_iter":3,"homotopy_steps":1},)"
                       << R"("output_dir":")" << (tmp.path / "stuck_out").string() << R"("})";
  CHECK(run_binary("--config " + stuck.string()) == 2);
  // the failure report still lands on disk with diagnostics
  const auto report = nlohmann::json::parse(slurp(tmp.path / "stuck_out" / "report.json"));
  CHECK(report.at("status").get<std::string>() == "non_convergence");
  CHECK(report.contains("message"));
}
