#pragma once

#include "optpot/forward.hpp"

namespace optpot {

/// Prescribed eigenvalues E_1* < ... < E_m*. Any realized Dirichlet spectrum
/// is simple and ordered, so non-increasing targets are rejected up front.
class TargetSet {
 public:
  explicit TargetSet(std::vector<double> targets);

  int m() const { return static_cast<int>(targets_.size()); }
  const std::vector<double>& values() const { return targets_; }
  double operator[](std::size_t k) const { return targets_[k]; }

 private:
  std::vector<double> targets_;
};

/// Coefficients of the reduced parametrization V = V0 + sum_j c_j phi_j^2(V).
/// sigma_j = -sign(c_j) after thresholding, u_j = |c_j|^{1/2} phi_j.
struct Coefficients {
  std::vector<double> c;
};

struct SolverOptions {
  double scf_tol = 1e-11;        // sup-norm self-consistency residual
  double scf_damping = 0.5;      // in (0, 1]
  int scf_max_iter = 500;
  double newton_tol = 1e-9;      // max_k |E_k(V(c)) - E_k*|
  int newton_max_iter = 50;
  int homotopy_steps = 8;
  double sigma_threshold = 1e-8;  // |c_j| below this reports sigma_j = 0
  bool use_fd_jacobian = false;   // finite differences instead of the Gram matrix
  double fd_jacobian_step = 1e-6;

  void validate() const;
};

struct ScfResult {
  SampledFunction V;
  Spectrum spectrum;  // first m pairs of V
  int iterations;
  double residual;
};

/// Damped fixed-point iteration for the self-consistent potential
/// V = V0 + sum_j c_j phi_j^2(V), started from V0.
ScfResult scf_fixed_point(const Coefficients& c, const SampledFunction& V0,
                          const SolverOptions& opts);

/// Constraint residual F_k(c) = E_k(V(c)) - E_k* at the SCF fixed point.
std::vector<double> reduced_residual(const Coefficients& c, const SampledFunction& V0,
                                     const TargetSet& targets, const SolverOptions& opts);

struct IterationStats {
  int homotopy_steps_taken = 0;
  int homotopy_bisections = 0;
  int newton_iterations = 0;
  int scf_iterations = 0;
};

struct InverseSolution {
  SampledFunction V_hat;
  Spectrum spectrum;  // first m pairs of V_hat, recomputed at the emitted potential
  Coefficients c;
  std::vector<int> sigma;                // entries in {-1, 0, +1}
  std::vector<SampledFunction> u_hat;    // u_j = |c_j|^{1/2} phi_j, zero when sigma_j = 0
  double distance;                       // ||V0 - V_hat||_L2
  std::vector<double> constraint_residuals;  // |E_k(V_hat) - E_k*|
  double stationarity_residual;
  IterationStats iterations;
};

/// Solve for the L2-closest potential with the prescribed first m eigenvalues:
/// homotopy in the targets, Newton in the coefficient vector (Gram-matrix
/// Jacobian), SCF fixed point in the inner loop.
InverseSolution solve_inverse(const SampledFunction& V0, const TargetSet& targets,
                              const SolverOptions& opts = {});

/// Relative distance of V_hat - V0 from the span of the squared
/// eigenfunctions of V_hat; zero at a first-order optimal point.
double stationarity_residual(const SampledFunction& V_hat, const SampledFunction& V0,
                             const Spectrum& spectrum);

}  // namespace optpot
