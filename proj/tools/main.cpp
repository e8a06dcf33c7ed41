#include <algorithm>
#include <cstdio>
#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "optpot/cli.hpp"

namespace {

void print_summary(const optpot::cli::RunReport& report) {
  std::printf("status: %s\n", report.status.c_str());
  std::printf("eigenvalues of V0:");
  for (double e : report.v0_eigenvalues) std::printf(" %.12g", e);
  std::printf("\n");
  if (report.solution.has_value()) {
    const auto& sol = *report.solution;
    std::printf("distance ||V0 - V_hat|| = %.12g\n", sol.distance);
    std::printf("sigma:");
    for (int s : sol.sigma) std::printf(" %+d", s);
    std::printf("\n");
    double max_residual = 0.0;
    for (double r : sol.constraint_residuals) max_residual = std::max(max_residual, r);
    std::printf("max constraint residual = %.3g, stationarity residual = %.3g\n", max_residual,
                sol.stationarity_residual);
  }
  if (report.verify.has_value()) {
    const auto& v = *report.verify;
    std::printf("max system residual = %.3g, gram smallest eigenvalue = %.6g\n",
                v.max_system_residual, v.gram_smallest_eigenvalue);
    std::printf("oracle distance = %.12g (solver %.12g, %d feasible restarts)\n",
                v.minimality.oracle_distance, v.minimality.solver_distance,
                v.minimality.feasible_count);
  }
  std::printf("wall time: %.3f s\n", report.wall_time_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closest-potential solver for prescribed Dirichlet eigenvalues"};
  std::string config_path;
  std::string output_override;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "Path to the JSON run configuration")->required();
  app.add_option("-o,--output", output_override, "Override the configured output directory");
  app.add_flag("-q,--quiet", quiet, "Suppress the run summary on stdout");
  CLI11_PARSE(app, argc, argv);

  try {
    optpot::cli::RunConfig config = optpot::cli::load_config_file(config_path);
    if (!output_override.empty()) config.output_dir = output_override;
    const optpot::cli::RunReport report = optpot::cli::run(config);
    if (!quiet) print_summary(report);
    return 0;
  } catch (const optpot::cli::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 1;
  } catch (const optpot::InputFormatError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 1;
  } catch (const optpot::NonConvergenceError& err) {
    std::cerr << "solver did not converge: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
