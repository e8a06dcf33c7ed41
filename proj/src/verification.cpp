#include "optpot/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "optpot/derivative.hpp"
#include "optpot/linalg.hpp"

namespace optpot {

SystemResidual system_residual(const std::vector<SampledFunction>& u_hat,
                               const std::vector<int>& sigma, const SampledFunction& V0,
                               const TargetSet& targets) {
  const std::size_t m = u_hat.size();
  if (sigma.size() != m || static_cast<std::size_t>(targets.m()) != m) {
    throw std::invalid_argument("system_residual: inconsistent sizes");
  }
  for (int s : sigma) {
    if (s < -1 || s > 1) throw std::invalid_argument("system_residual: sigma entries must be -1, 0 or +1");
  }
  for (const auto& u : u_hat) {
    if (!(u.grid() == V0.grid())) throw GridMismatchError("system_residual: grids differ");
  }

  const Grid& grid = V0.grid();
  const int n = grid.n();
  const double inv_h2 = 1.0 / (grid.h() * grid.h());

  // Effective potential appearing in every equation: V0 - sum_j sigma_j u_j^2.
  std::vector<double> coupled = V0.values();
  for (std::size_t j = 0; j < m; ++j) {
    if (sigma[j] == 0) continue;
    const auto& u = u_hat[j].values();
    const double s = static_cast<double>(sigma[j]);
    for (int i = 0; i < n; ++i) {
      coupled[static_cast<std::size_t>(i)] -= s * u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
    }
  }

  SystemResidual out;
  out.per_equation.resize(m);
  out.max_residual = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& u = u_hat[j].values();
    const double e = targets[j];
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const double left = i > 0 ? u[si - 1] : 0.0;
      const double right = i + 1 < n ? u[si + 1] : 0.0;
      const double d2 = (left - 2.0 * u[si] + right) * inv_h2;
      const double r = -d2 + coupled[si] * u[si] - e * u[si];
      sum += r * r;
    }
    out.per_equation[j] = std::sqrt(grid.h() * sum);
    out.max_residual = std::max(out.max_residual, out.per_equation[j]);
  }
  return out;
}

double independence_check(const SampledFunction& V, int m) {
  return gram_matrix(V, m).smallest_eigenvalue;
}

namespace {

constexpr double kFeasibilityTol = 1e-6;
constexpr int kMaxGaussNewton = 60;

struct HatBasis {
  std::vector<SampledFunction> functions;  // sampled on the fine grid
  linalg::Matrix overlap;                  // <B_i, B_j>
};

HatBasis build_hat_basis(const Grid& grid, int basis_dim) {
  const double spacing = grid.L() / static_cast<double>(basis_dim + 1);
  HatBasis basis{{}, linalg::Matrix(basis_dim)};
  basis.functions.reserve(static_cast<std::size_t>(basis_dim));
  for (int b = 1; b <= basis_dim; ++b) {
    const double center = spacing * static_cast<double>(b);
    std::vector<double> values(static_cast<std::size_t>(grid.n()));
    for (int i = 0; i < grid.n(); ++i) {
      values[static_cast<std::size_t>(i)] =
          std::max(0.0, 1.0 - std::abs(grid.node(i) - center) / spacing);
    }
    basis.functions.emplace_back(grid, std::move(values));
  }
  for (int i = 0; i < basis_dim; ++i) {
    for (int j = i; j < basis_dim; ++j) {
      const double v = inner_product(basis.functions[static_cast<std::size_t>(i)],
                                     basis.functions[static_cast<std::size_t>(j)]);
      basis.overlap(i, j) = v;
      basis.overlap(j, i) = v;
    }
  }
  return basis;
}

struct PenaltyState {
  std::vector<double> eigs;                 // E_k(V(a))
  std::vector<std::vector<double>> grads;   // g_k[i] = <phi_k^2, B_i>
  double distance_sq;
  double objective(double rho, const std::vector<double>& targets) const {
    double penalty = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const double d = eigs[k] - targets[k];
      penalty += d * d;
    }
    return distance_sq + rho * penalty;
  }
};

SampledFunction assemble_candidate(const SampledFunction& V0, const HatBasis& basis,
                                   const std::vector<double>& a) {
  std::vector<double> values = V0.values();
  for (std::size_t b = 0; b < a.size(); ++b) {
    if (a[b] == 0.0) continue;
    const auto& hat = basis.functions[b].values();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += a[b] * hat[i];
  }
  return SampledFunction(V0.grid(), std::move(values));
}

PenaltyState evaluate(const SampledFunction& V0, const HatBasis& basis,
                      const std::vector<double>& a, int m, bool with_gradients) {
  const int dim = static_cast<int>(a.size());
  PenaltyState state;
  const SampledFunction V = assemble_candidate(V0, basis, a);
  const Spectrum spectrum = lowest_eigenpairs(V, m);
  state.eigs = spectrum.eigenvalues();
  if (with_gradients) {
    state.grads.resize(static_cast<std::size_t>(m));
    for (int k = 1; k <= m; ++k) {
      const SampledFunction grad = squared(spectrum.phi(k));
      auto& g = state.grads[static_cast<std::size_t>(k - 1)];
      g.resize(static_cast<std::size_t>(dim));
      for (int b = 0; b < dim; ++b) {
        g[static_cast<std::size_t>(b)] = inner_product(grad, basis.functions[static_cast<std::size_t>(b)]);
      }
    }
  }
  state.distance_sq = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      state.distance_sq += a[static_cast<std::size_t>(i)] * basis.overlap(i, j) * a[static_cast<std::size_t>(j)];
    }
  }
  return state;
}

// Damped Gauss-Newton descent on ||V-V0||^2 + rho * sum (E_k - E_k*)^2,
// eigenvalue gradients chained onto the basis coefficients.
void descend(std::vector<double>& a, const SampledFunction& V0, const HatBasis& basis,
             const std::vector<double>& targets, double rho) {
  const int dim = static_cast<int>(a.size());
  const int m = static_cast<int>(targets.size());
  double lambda = 1e-8;

  for (int iter = 0; iter < kMaxGaussNewton; ++iter) {
    const PenaltyState state = evaluate(V0, basis, a, m, true);
    const double f0 = state.objective(rho, targets);

    std::vector<double> grad(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i) {
      double v = 0.0;
      for (int j = 0; j < dim; ++j) v += basis.overlap(i, j) * a[static_cast<std::size_t>(j)];
      grad[static_cast<std::size_t>(i)] = 2.0 * v;
    }
    for (int k = 0; k < m; ++k) {
      const double d = state.eigs[static_cast<std::size_t>(k)] - targets[static_cast<std::size_t>(k)];
      const auto& g = state.grads[static_cast<std::size_t>(k)];
      for (int i = 0; i < dim; ++i) grad[static_cast<std::size_t>(i)] += 2.0 * rho * d * g[static_cast<std::size_t>(i)];
    }

    double grad_norm = 0.0;
    for (double v : grad) grad_norm = std::max(grad_norm, std::abs(v));
    if (grad_norm <= 1e-12 * (1.0 + std::abs(f0))) return;

    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      linalg::Matrix hess(dim);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) hess(i, j) = 2.0 * basis.overlap(i, j);
        hess(i, i) += lambda;
      }
      for (int k = 0; k < m; ++k) {
        const auto& g = state.grads[static_cast<std::size_t>(k)];
        for (int i = 0; i < dim; ++i) {
          for (int j = 0; j < dim; ++j) {
            hess(i, j) += 2.0 * rho * g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(j)];
          }
        }
      }
      std::vector<double> rhs(static_cast<std::size_t>(dim));
      for (int i = 0; i < dim; ++i) rhs[static_cast<std::size_t>(i)] = -grad[static_cast<std::size_t>(i)];

      std::vector<double> delta;
      try {
        delta = linalg::solve(std::move(hess), std::move(rhs));
      } catch (const ConditioningError&) {
        lambda = std::max(lambda * 10.0, 1e-6);
        continue;
      }

      std::vector<double> trial = a;
      double step_norm = 0.0;
      for (int i = 0; i < dim; ++i) {
        trial[static_cast<std::size_t>(i)] += delta[static_cast<std::size_t>(i)];
        step_norm = std::max(step_norm, std::abs(delta[static_cast<std::size_t>(i)]));
      }
      const PenaltyState probe = evaluate(V0, basis, trial, m, false);
      if (probe.objective(rho, targets) < f0) {
        a = std::move(trial);
        lambda = std::max(lambda * 0.25, 1e-12);
        accepted = true;
        if (step_norm <= 1e-11 * (1.0 + 1.0)) return;
      } else {
        lambda = std::max(lambda * 10.0, 1e-6);
      }
    }
    if (!accepted) return;  // no further progress at this penalty level
  }
}

}  // namespace

MinimalityReport minimality_oracle(const SampledFunction& V0, const TargetSet& targets,
                                   int basis_dim, int trials, std::uint64_t seed,
                                   const InverseSolution* solution) {
  const int m = targets.m();
  if (basis_dim < m) throw std::invalid_argument("minimality_oracle: basis_dim must be >= m");
  if (trials < 1) throw std::invalid_argument("minimality_oracle: trials must be >= 1");

  const HatBasis basis = build_hat_basis(V0.grid(), basis_dim);
  const std::vector<double>& target_values = targets.values();
  static const double kPenalties[] = {1e2, 1e4, 1e6, 1e8};

  std::vector<std::vector<double>> starts;
  if (solution != nullptr) {
    // L2 projection of the reference correction onto the hat basis.
    const SampledFunction w = solution->V_hat - V0;
    std::vector<double> b(static_cast<std::size_t>(basis_dim));
    linalg::Matrix overlap = basis.overlap;
    for (int i = 0; i < basis_dim; ++i) {
      b[static_cast<std::size_t>(i)] = inner_product(basis.functions[static_cast<std::size_t>(i)], w);
    }
    starts.push_back(linalg::solve(std::move(overlap), std::move(b)));
  }
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    std::vector<double> a(static_cast<std::size_t>(basis_dim));
    for (double& v : a) v = uni(gen);
    starts.push_back(std::move(a));
  }

  MinimalityReport report;
  report.basis_dim = basis_dim;
  report.solver_distance =
      solution != nullptr ? solution->distance : std::numeric_limits<double>::quiet_NaN();
  report.oracle_distance = std::numeric_limits<double>::infinity();
  report.feasible_count = 0;

  for (auto& a : starts) {
    for (double rho : kPenalties) descend(a, V0, basis, target_values, rho);

    const PenaltyState final_state = evaluate(V0, basis, a, m, false);
    double residual = 0.0;
    for (int k = 0; k < m; ++k) {
      residual = std::max(residual, std::abs(final_state.eigs[static_cast<std::size_t>(k)] -
                                             target_values[static_cast<std::size_t>(k)]));
    }
    const double distance = std::sqrt(std::max(0.0, final_state.distance_sq));
    const bool feasible = residual <= kFeasibilityTol;
    report.restarts.push_back(OracleRestart{distance, residual, feasible});
    if (feasible) {
      ++report.feasible_count;
      report.oracle_distance = std::min(report.oracle_distance, distance);
    }
  }
  report.gap = report.oracle_distance - report.solver_distance;
  return report;
}

}  // namespace optpot
