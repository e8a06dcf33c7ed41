#include "optpot/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace optpot::cli {

namespace {

using nlohmann::ordered_json;

double parse_pi_number(const ordered_json& value, const std::string& field) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const std::string text = value.get<std::string>();
    const auto pos = text.rfind("pi");
    if (pos != std::string::npos && pos + 2 == text.size()) {
      const std::string factor = text.substr(0, pos);
      if (factor.empty()) return std::numbers::pi;
      if (factor == "-") return -std::numbers::pi;
      try {
        std::size_t consumed = 0;
        const double f = std::stod(factor, &consumed);
        if (consumed == factor.size()) return f * std::numbers::pi;
      } catch (const std::exception&) {
      }
    }
    throw ConfigError("field '" + field + "': cannot parse '" + text +
                      "' (expected a number or a pi literal like \"2pi\")");
  }
  throw ConfigError("field '" + field + "': expected a number");
}

PotentialSpec parse_potential(const ordered_json& node, double L) {
  if (!node.is_object() || !node.contains("kind")) {
    throw ConfigError("field 'potential': expected an object with a 'kind'");
  }
  const std::string kind = node.at("kind").get<std::string>();
  auto param = [&node](const char* name) -> const ordered_json& {
    if (!node.contains(name)) {
      throw ConfigError(std::string("potential: missing parameter '") + name + "'");
    }
    return node.at(name);
  };
  if (kind == "zero") return ZeroPotential{};
  if (kind == "constant") return ConstantPotential{parse_pi_number(param("value"), "potential.value")};
  if (kind == "harmonic") {
    return HarmonicPotential{parse_pi_number(param("a"), "potential.a"),
                             parse_pi_number(param("center"), "potential.center")};
  }
  if (kind == "square_well") {
    const SquareWellPotential well{parse_pi_number(param("depth"), "potential.depth"),
                                   parse_pi_number(param("left"), "potential.left"),
                                   parse_pi_number(param("right"), "potential.right")};
    if (!(0.0 <= well.left && well.left < well.right && well.right <= L)) {
      throw ConfigError("potential: square well requires 0 <= left < right <= L");
    }
    return well;
  }
  if (kind == "samples") return SamplesPotential{param("path").get<std::string>()};
  throw ConfigError("potential: unknown kind '" + kind + "'");
}

ordered_json potential_to_json(const PotentialSpec& spec) {
  ordered_json out;
  std::visit(
      [&out](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ZeroPotential>) {
          out["kind"] = "zero";
        } else if constexpr (std::is_same_v<P, ConstantPotential>) {
          out["kind"] = "constant";
          out["value"] = p.value;
        } else if constexpr (std::is_same_v<P, HarmonicPotential>) {
          out["kind"] = "harmonic";
          out["a"] = p.a;
          out["center"] = p.center;
        } else if constexpr (std::is_same_v<P, SquareWellPotential>) {
          out["kind"] = "square_well";
          out["depth"] = p.depth;
          out["left"] = p.left;
          out["right"] = p.right;
        } else if constexpr (std::is_same_v<P, SamplesPotential>) {
          out["kind"] = "samples";
          out["path"] = p.path;
        }
      },
      spec);
  return out;
}

}  // namespace

RunConfig validate_config(const std::string& raw) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(raw);
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError(std::string("config parse error: ") + err.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig cfg;
  if (!doc.contains("mode")) throw ConfigError("missing field 'mode'");
  const std::string mode = doc.at("mode").get<std::string>();
  if (mode == "forward") {
    cfg.mode = Mode::Forward;
  } else if (mode == "inverse") {
    cfg.mode = Mode::Inverse;
  } else if (mode == "verify") {
    cfg.mode = Mode::Verify;
  } else {
    throw ConfigError("field 'mode': expected forward, inverse or verify, got '" + mode + "'");
  }

  if (!doc.contains("L")) throw ConfigError("missing field 'L'");
  cfg.L = parse_pi_number(doc.at("L"), "L");
  if (!(cfg.L > 0.0) || !std::isfinite(cfg.L)) throw ConfigError("field 'L': must be positive");

  if (doc.contains("n")) cfg.n = doc.at("n").get<int>();
  if (cfg.n < 3) throw ConfigError("field 'n': need at least 3 interior points");

  if (!doc.contains("potential")) throw ConfigError("missing field 'potential'");
  cfg.potential = parse_potential(doc.at("potential"), cfg.L);

  if (!doc.contains("m")) throw ConfigError("missing field 'm'");
  cfg.m = doc.at("m").get<int>();
  if (cfg.m < 1) throw ConfigError("field 'm': must be >= 1");
  if (cfg.m > cfg.n) throw ConfigError("field 'm': exceeds the number of grid points n");

  if (doc.contains("targets")) {
    for (std::size_t i = 0; i < doc.at("targets").size(); ++i) {
      cfg.targets.push_back(
          parse_pi_number(doc.at("targets").at(i), "targets[" + std::to_string(i) + "]"));
    }
  }
  if (cfg.mode == Mode::Forward) {
    if (!cfg.targets.empty()) throw ConfigError("forward mode takes no 'targets'");
  } else {
    if (cfg.targets.empty()) throw ConfigError("inverse/verify mode requires 'targets'");
    if (static_cast<int>(cfg.targets.size()) != cfg.m) {
      throw ConfigError("field 'targets': expected exactly m = " + std::to_string(cfg.m) + " values");
    }
    for (std::size_t i = 1; i < cfg.targets.size(); ++i) {
      if (!(cfg.targets[i - 1] < cfg.targets[i])) {
        throw ConfigError("targets must be strictly increasing");
      }
    }
  }

  if (doc.contains("solver")) {
    const auto& s = doc.at("solver");
    if (s.contains("scf_tol")) cfg.solver.scf_tol = s.at("scf_tol").get<double>();
    if (s.contains("scf_damping")) cfg.solver.scf_damping = s.at("scf_damping").get<double>();
    if (s.contains("scf_max_iter")) cfg.solver.scf_max_iter = s.at("scf_max_iter").get<int>();
    if (s.contains("newton_tol")) cfg.solver.newton_tol = s.at("newton_tol").get<double>();
    if (s.contains("newton_max_iter")) cfg.solver.newton_max_iter = s.at("newton_max_iter").get<int>();
    if (s.contains("homotopy_steps")) cfg.solver.homotopy_steps = s.at("homotopy_steps").get<int>();
    if (s.contains("sigma_threshold")) cfg.solver.sigma_threshold = s.at("sigma_threshold").get<double>();
    if (s.contains("use_fd_jacobian")) cfg.solver.use_fd_jacobian = s.at("use_fd_jacobian").get<bool>();
    if (s.contains("fd_jacobian_step")) cfg.solver.fd_jacobian_step = s.at("fd_jacobian_step").get<double>();
    try {
      cfg.solver.validate();
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("solver options: ") + err.what());
    }
  }

  if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("oracle")) {
    const auto& o = doc.at("oracle");
    if (o.contains("basis_dim")) cfg.oracle.basis_dim = o.at("basis_dim").get<int>();
    if (o.contains("trials")) cfg.oracle.trials = o.at("trials").get<int>();
    if (cfg.oracle.basis_dim < cfg.m) throw ConfigError("oracle.basis_dim must be >= m");
    if (cfg.oracle.trials < 1) throw ConfigError("oracle.trials must be >= 1");
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return validate_config(buffer.str());
}

namespace {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns, const Grid& grid) {
  std::ostringstream out;
  out << "x";
  for (const auto& name : header) out << ',' << name;
  out << '\n';
  for (int i = 0; i < grid.n(); ++i) {
    out << format_full(grid.node(i));
    for (const auto* col : columns) out << ',' << format_full((*col)[static_cast<std::size_t>(i)]);
    out << '\n';
  }
  write_file(path, out.str());
}

ordered_json solver_to_json(const SolverOptions& s) {
  ordered_json out;
  out["scf_tol"] = s.scf_tol;
  out["scf_damping"] = s.scf_damping;
  out["scf_max_iter"] = s.scf_max_iter;
  out["newton_tol"] = s.newton_tol;
  out["newton_max_iter"] = s.newton_max_iter;
  out["homotopy_steps"] = s.homotopy_steps;
  out["sigma_threshold"] = s.sigma_threshold;
  out["use_fd_jacobian"] = s.use_fd_jacobian;
  out["fd_jacobian_step"] = s.fd_jacobian_step;
  return out;
}

ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json out;
  out["mode"] = cfg.mode == Mode::Forward ? "forward" : (cfg.mode == Mode::Inverse ? "inverse" : "verify");
  out["L"] = cfg.L;
  out["n"] = cfg.n;
  out["potential"] = potential_to_json(cfg.potential);
  out["m"] = cfg.m;
  if (!cfg.targets.empty()) out["targets"] = cfg.targets;
  out["solver"] = solver_to_json(cfg.solver);
  out["output_dir"] = cfg.output_dir;
  out["seed"] = cfg.seed;
  if (cfg.mode == Mode::Verify) {
    out["oracle"] = ordered_json{{"basis_dim", cfg.oracle.basis_dim}, {"trials", cfg.oracle.trials}};
  }
  return out;
}

double json_safe(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

std::string report_to_json(const RunReport& report) {
  ordered_json out;
  out["config"] = config_to_json(report.config);
  out["status"] = report.status;
  if (!report.message.empty()) out["message"] = report.message;
  out["v0_eigenvalues"] = report.v0_eigenvalues;

  if (report.solution.has_value()) {
    const InverseSolution& sol = *report.solution;
    ordered_json inv;
    inv["eigenvalues"] = sol.spectrum.eigenvalues();
    inv["distance"] = sol.distance;
    inv["c"] = sol.c.c;
    inv["sigma"] = sol.sigma;
    inv["constraint_residuals"] = sol.constraint_residuals;
    inv["stationarity_residual"] = sol.stationarity_residual;
    inv["iterations"] = ordered_json{{"homotopy_steps_taken", sol.iterations.homotopy_steps_taken},
                                     {"homotopy_bisections", sol.iterations.homotopy_bisections},
                                     {"newton_iterations", sol.iterations.newton_iterations},
                                     {"scf_iterations", sol.iterations.scf_iterations}};
    out["inverse"] = inv;
  }

  if (report.verify.has_value()) {
    const VerifySummary& v = *report.verify;
    ordered_json ver;
    ver["system_residuals"] = v.system_residuals;
    ver["max_system_residual"] = v.max_system_residual;
    ver["gram_smallest_eigenvalue"] = v.gram_smallest_eigenvalue;
    ordered_json mini;
    mini["solver_distance"] = json_safe(v.minimality.solver_distance);
    mini["oracle_distance"] = json_safe(v.minimality.oracle_distance);
    mini["basis_dim"] = v.minimality.basis_dim;
    mini["gap"] = json_safe(v.minimality.gap);
    mini["feasible_count"] = v.minimality.feasible_count;
    ordered_json restarts = ordered_json::array();
    for (const auto& r : v.minimality.restarts) {
      restarts.push_back(ordered_json{{"distance", r.distance},
                                      {"max_constraint_residual", r.max_constraint_residual},
                                      {"feasible", r.feasible}});
    }
    mini["restarts"] = restarts;
    ver["minimality"] = mini;
    out["verify"] = ver;
  }

  out["wall_time_seconds"] = report.wall_time_seconds;
  return out.dump(2) + "\n";
}

RunReport run(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path out_dir(config.output_dir);
  std::filesystem::create_directories(out_dir);

  RunReport report;
  report.config = config;
  report.status = "ok";

  const Grid grid = make_grid(config.L, config.n);
  const SampledFunction V0 = sample_potential(config.potential, grid);
  const Spectrum base = lowest_eigenpairs(V0, config.m);
  report.v0_eigenvalues = base.eigenvalues();

  auto finish = [&](RunReport& r) {
    const auto t1 = std::chrono::steady_clock::now();
    r.wall_time_seconds = std::chrono::duration<double>(t1 - t0).count();
    write_file(out_dir / "report.json", report_to_json(r));
  };

  if (config.mode == Mode::Forward) {
    write_csv(out_dir / "potential.csv", {"v0"}, {&V0.values()}, grid);
    std::vector<std::string> names;
    std::vector<const std::vector<double>*> cols;
    for (int k = 1; k <= config.m; ++k) {
      names.push_back("phi_" + std::to_string(k));
      cols.push_back(&base.phi(k).values());
    }
    write_csv(out_dir / "eigenfunctions.csv", names, cols, grid);
    finish(report);
    return report;
  }

  const TargetSet targets(config.targets);
  try {
    report.solution = solve_inverse(V0, targets, config.solver);
  } catch (const NonConvergenceError& err) {
    report.status = "non_convergence";
    report.message = err.what();
    finish(report);
    throw;
  }
  const InverseSolution& solution = *report.solution;

  if (config.mode == Mode::Verify) {
    VerifySummary verify;
    const SystemResidual sys = system_residual(solution.u_hat, solution.sigma, V0, targets);
    verify.system_residuals = sys.per_equation;
    verify.max_system_residual = sys.max_residual;
    verify.gram_smallest_eigenvalue = independence_check(solution.V_hat, config.m);
    verify.minimality = minimality_oracle(V0, targets, config.oracle.basis_dim, config.oracle.trials,
                                          config.seed, &solution);
    report.verify = std::move(verify);
  }

  write_csv(out_dir / "potential.csv", {"v0", "v_hat"}, {&V0.values(), &solution.V_hat.values()}, grid);
  {
    std::vector<std::string> names;
    std::vector<const std::vector<double>*> cols;
    for (int k = 1; k <= config.m; ++k) {
      names.push_back("phi_" + std::to_string(k));
      cols.push_back(&solution.spectrum.phi(k).values());
    }
    write_csv(out_dir / "eigenfunctions.csv", names, cols, grid);
  }
  {
    std::vector<std::string> names;
    std::vector<const std::vector<double>*> cols;
    for (int k = 1; k <= config.m; ++k) {
      names.push_back("u_" + std::to_string(k));
      cols.push_back(&solution.u_hat[static_cast<std::size_t>(k - 1)].values());
    }
    write_csv(out_dir / "u_hat.csv", names, cols, grid);
  }
  {
    ordered_json sig = ordered_json::array();
    for (int s : solution.sigma) sig.push_back(s);
    write_file(out_dir / "sigma.json", sig.dump() + "\n");
  }
  finish(report);
  return report;
}

}  // namespace optpot::cli
