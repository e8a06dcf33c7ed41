#pragma once

#include <cstdint>
#include <optional>

#include "optpot/inverse.hpp"

namespace optpot {

/// Discrete residual of the coupled system
///   -u_i'' + V0 u_i = E_i* u_i + (sum_j sigma_j u_j^2) u_i,  u_i(0)=u_i(L)=0,
/// using the same 3-point second difference as the forward solver.
struct SystemResidual {
  std::vector<double> per_equation;  // grid-weighted L2 norm per equation
  double max_residual;
};

SystemResidual system_residual(const std::vector<SampledFunction>& u_hat,
                               const std::vector<int>& sigma, const SampledFunction& V0,
                               const TargetSet& targets);

/// Smallest eigenvalue of the Gram matrix of squared eigenfunctions of V;
/// strictly positive when the squared modes are linearly independent.
double independence_check(const SampledFunction& V, int m);

struct OracleRestart {
  double distance;
  double max_constraint_residual;
  bool feasible;
};

struct MinimalityReport {
  double solver_distance;   // NaN when no reference solution was supplied
  double oracle_distance;   // +inf when no restart reached feasibility
  int basis_dim;
  double gap;               // oracle_distance - solver_distance
  int feasible_count;
  std::vector<OracleRestart> restarts;
};

/// Brute-force check of minimality: minimize ||V - V0||^2 over a hat-function
/// basis subject to the eigenvalue constraints, by quadratic-penalty
/// continuation with a damped Gauss-Newton descent, restarted from `trials`
/// random points (plus the projection of the reference solution when given).
/// Deterministic for a fixed seed.
MinimalityReport minimality_oracle(const SampledFunction& V0, const TargetSet& targets,
                                   int basis_dim, int trials, std::uint64_t seed,
                                   const InverseSolution* solution = nullptr);

}  // namespace optpot
