#pragma once

#include <optional>
#include <string>

#include "optpot/inverse.hpp"
#include "optpot/verification.hpp"

namespace optpot::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Mode { Forward, Inverse, Verify };

struct OracleConfig {
  int basis_dim = 32;
  int trials = 5;
};

/// One run, fully described by a JSON config file. Numeric fields accept
/// "pi" literals ("pi", "2pi", "0.5pi") alongside plain numbers.
struct RunConfig {
  Mode mode = Mode::Forward;
  double L = 0.0;
  int n = 2000;
  PotentialSpec potential = ZeroPotential{};
  int m = 1;
  std::vector<double> targets;  // empty in forward mode
  SolverOptions solver;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  OracleConfig oracle;
};

RunConfig validate_config(const std::string& raw);
RunConfig load_config_file(const std::string& path);

struct VerifySummary {
  std::vector<double> system_residuals;
  double max_system_residual = 0.0;
  double gram_smallest_eigenvalue = 0.0;
  MinimalityReport minimality;
};

struct RunReport {
  RunConfig config;
  std::string status;  // "ok" or "non_convergence"
  std::string message;
  std::vector<double> v0_eigenvalues;
  std::optional<InverseSolution> solution;
  std::optional<VerifySummary> verify;
  double wall_time_seconds = 0.0;
};

/// Serialized report with stable key order; wall_time_seconds is the only
/// field that varies between identical runs.
std::string report_to_json(const RunReport& report);

/// Execute the configured pipeline and emit report.json plus the CSV/JSON
/// artifacts into config.output_dir. On solver non-convergence the report is
/// still written (status "non_convergence") before the error propagates.
RunReport run(const RunConfig& config);

}  // namespace optpot::cli
