#include "optpot/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "optpot/derivative.hpp"
#include "optpot/linalg.hpp"

namespace optpot {

TargetSet::TargetSet(std::vector<double> targets) : targets_(std::move(targets)) {
  if (targets_.empty()) throw std::invalid_argument("TargetSet: need at least one target");
  for (double t : targets_) {
    if (!std::isfinite(t)) throw std::invalid_argument("TargetSet: non-finite target");
  }
  for (std::size_t i = 1; i < targets_.size(); ++i) {
    if (!(targets_[i - 1] < targets_[i])) {
      throw std::invalid_argument("targets must be strictly increasing");
    }
  }
}

void SolverOptions::validate() const {
  if (!(scf_tol > 0.0) || !(newton_tol > 0.0) || !(sigma_threshold > 0.0) ||
      !(fd_jacobian_step > 0.0)) {
    throw std::invalid_argument("SolverOptions: tolerances must be positive");
  }
  if (!(scf_damping > 0.0 && scf_damping <= 1.0)) {
    throw std::invalid_argument("SolverOptions: scf_damping must lie in (0, 1]");
  }
  if (scf_max_iter < 1 || newton_max_iter < 1 || homotopy_steps < 1) {
    throw std::invalid_argument("SolverOptions: iteration budgets must be positive");
  }
}

namespace {

// Fixed-point map Phi(V) = V0 + sum_j c_j phi_j^2(V), evaluated from a
// spectrum already computed at V.
std::vector<double> apply_map(const std::vector<double>& c, const SampledFunction& V0,
                              const Spectrum& spectrum) {
  std::vector<double> out = V0.values();
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j] == 0.0) continue;
    const auto& phi = spectrum.phi(static_cast<int>(j) + 1).values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[j] * phi[i] * phi[i];
  }
  return out;
}

}  // namespace

ScfResult scf_fixed_point(const Coefficients& c, const SampledFunction& V0,
                          const SolverOptions& opts) {
  opts.validate();
  const int m = static_cast<int>(c.c.size());
  if (m < 1) throw std::invalid_argument("scf_fixed_point: empty coefficient vector");
  for (double v : c.c) {
    if (!std::isfinite(v)) throw std::invalid_argument("scf_fixed_point: non-finite coefficient");
  }

  SampledFunction V = V0;
  double residual = 0.0;
  for (int iter = 1; iter <= opts.scf_max_iter; ++iter) {
    Spectrum spectrum = [&]() {
      try {
        return lowest_eigenpairs(V, m);
      } catch (const InternalConsistencyError& err) {
        // At the prior itself this is an input problem; after that the
        // fixed-point path has left the well-resolved regime.
        if (iter == 1) throw;
        throw NonConvergenceError(
            std::string("scf_fixed_point: eigensolver lost index consistency at iteration ") +
                std::to_string(iter) + " (" + err.what() + ")",
            residual, iter);
      }
    }();
    const std::vector<double> mapped = apply_map(c.c, V0, spectrum);

    residual = 0.0;
    for (std::size_t i = 0; i < mapped.size(); ++i) {
      residual = std::max(residual, std::abs(V[i] - mapped[i]));
    }
    if (residual <= opts.scf_tol) {
      return ScfResult{std::move(V), std::move(spectrum), iter, residual};
    }

    std::vector<double> next(mapped.size());
    const double alpha = opts.scf_damping;
    for (std::size_t i = 0; i < mapped.size(); ++i) {
      next[i] = (1.0 - alpha) * V[i] + alpha * mapped[i];
    }
    V = SampledFunction(V0.grid(), std::move(next));
  }
  std::ostringstream msg;
  msg << "scf_fixed_point: no self-consistency after " << opts.scf_max_iter
      << " iterations (residual " << residual << "); coefficients too large for the damping";
  throw NonConvergenceError(msg.str(), residual, opts.scf_max_iter);
}

std::vector<double> reduced_residual(const Coefficients& c, const SampledFunction& V0,
                                     const TargetSet& targets, const SolverOptions& opts) {
  if (static_cast<int>(c.c.size()) != targets.m()) {
    throw std::invalid_argument("reduced_residual: coefficient/target size mismatch");
  }
  const ScfResult scf = scf_fixed_point(c, V0, opts);
  std::vector<double> f(c.c.size());
  for (int k = 1; k <= targets.m(); ++k) {
    f[static_cast<std::size_t>(k - 1)] = scf.spectrum.eigenvalue(k) - targets[static_cast<std::size_t>(k - 1)];
  }
  return f;
}

double stationarity_residual(const SampledFunction& V_hat, const SampledFunction& V0,
                             const Spectrum& spectrum) {
  const SampledFunction w = V_hat - V0;
  const double w_norm = l2_norm(w);
  if (w_norm == 0.0) return 0.0;

  const int m = spectrum.size();
  std::vector<SampledFunction> squares;
  squares.reserve(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) squares.push_back(squared(spectrum.phi(k)));

  linalg::Matrix g(m);
  std::vector<double> b(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const double v = inner_product(squares[static_cast<std::size_t>(i)],
                                     squares[static_cast<std::size_t>(j)]);
      g(i, j) = v;
      g(j, i) = v;
    }
    b[static_cast<std::size_t>(i)] = inner_product(squares[static_cast<std::size_t>(i)], w);
  }
  std::vector<double> beta;
  try {
    beta = linalg::solve(std::move(g), std::move(b));
  } catch (const ConditioningError&) {
    throw ConditioningError("stationarity_residual: Gram matrix of squared modes is numerically singular");
  }

  std::vector<double> rest = w.values();
  for (int j = 0; j < m; ++j) {
    const auto& sq = squares[static_cast<std::size_t>(j)].values();
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= beta[static_cast<std::size_t>(j)] * sq[i];
  }
  const double rest_norm = l2_norm(SampledFunction(w.grid(), std::move(rest)));
  return rest_norm / (w_norm + 1e-30);
}

namespace {

struct NewtonOutcome {
  bool converged = false;
  std::vector<double> c;
  double last_residual = 0.0;
};

// Newton iteration on F(c) = E(V(c)) - targets with the frozen-orbital
// Jacobian J_kj = <phi_k^2, phi_j^2> (exact to first order; the eigenfunction
// response enters only at second order). Reports stagnation so the homotopy
// driver can shrink its step.
NewtonOutcome newton_solve(std::vector<double> c, const SampledFunction& V0,
                           const std::vector<double>& step_targets, const SolverOptions& opts,
                           IterationStats& stats, ScfResult* final_state) {
  const int m = static_cast<int>(step_targets.size());
  NewtonOutcome out;
  std::vector<double> history;

  for (int iter = 0; iter < opts.newton_max_iter; ++iter) {
    ScfResult scf = scf_fixed_point(Coefficients{c}, V0, opts);
    stats.scf_iterations += scf.iterations;
    ++stats.newton_iterations;

    std::vector<double> f(static_cast<std::size_t>(m));
    double residual = 0.0;
    for (int k = 1; k <= m; ++k) {
      f[static_cast<std::size_t>(k - 1)] =
          scf.spectrum.eigenvalue(k) - step_targets[static_cast<std::size_t>(k - 1)];
      residual = std::max(residual, std::abs(f[static_cast<std::size_t>(k - 1)]));
    }
    out.last_residual = residual;
    if (residual <= opts.newton_tol) {
      out.converged = true;
      out.c = c;
      if (final_state != nullptr) *final_state = std::move(scf);
      return out;
    }

    history.push_back(residual);
    const std::size_t hn = history.size();
    if (hn >= 6 && history[hn - 1] > 0.9 * history[hn - 6]) {
      out.c = std::move(c);
      return out;  // stagnated
    }

    linalg::Matrix jac(m);
    if (opts.use_fd_jacobian) {
      for (int j = 0; j < m; ++j) {
        std::vector<double> cj = c;
        cj[static_cast<std::size_t>(j)] += opts.fd_jacobian_step;
        const ScfResult probe = scf_fixed_point(Coefficients{cj}, V0, opts);
        stats.scf_iterations += probe.iterations;
        for (int k = 1; k <= m; ++k) {
          const double fk = probe.spectrum.eigenvalue(k) - step_targets[static_cast<std::size_t>(k - 1)];
          jac(k - 1, j) = (fk - f[static_cast<std::size_t>(k - 1)]) / opts.fd_jacobian_step;
        }
      }
    } else {
      const GramMatrix gram = gram_from_spectrum(scf.spectrum);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) jac(i, j) = gram.entries(i, j);
      }
    }

    std::vector<double> rhs(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) rhs[static_cast<std::size_t>(k)] = -f[static_cast<std::size_t>(k)];
    const std::vector<double> delta = linalg::solve(std::move(jac), std::move(rhs));
    for (int j = 0; j < m; ++j) c[static_cast<std::size_t>(j)] += delta[static_cast<std::size_t>(j)];
  }
  out.c = std::move(c);
  return out;  // budget exhausted
}

}  // namespace

InverseSolution solve_inverse(const SampledFunction& V0, const TargetSet& targets,
                              const SolverOptions& opts) {
  opts.validate();
  const int m = targets.m();
  if (m > V0.grid().n()) {
    throw std::invalid_argument("solve_inverse: more targets than grid points");
  }

  const Spectrum base = lowest_eigenpairs(V0, m);
  const std::vector<double> base_eigs = base.eigenvalues();
  IterationStats stats;

  double max_shift = 0.0;
  for (int k = 0; k < m; ++k) {
    max_shift = std::max(max_shift, std::abs(targets[static_cast<std::size_t>(k)] - base_eigs[static_cast<std::size_t>(k)]));
  }
  if (max_shift <= opts.newton_tol) {
    // Targets already realized by V0: the minimizer is V0 itself.
    std::vector<double> residuals(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      residuals[static_cast<std::size_t>(k)] =
          std::abs(base_eigs[static_cast<std::size_t>(k)] - targets[static_cast<std::size_t>(k)]);
    }
    return InverseSolution{V0,
                           base,
                           Coefficients{std::vector<double>(static_cast<std::size_t>(m), 0.0)},
                           std::vector<int>(static_cast<std::size_t>(m), 0),
                           std::vector<SampledFunction>(static_cast<std::size_t>(m),
                                                        SampledFunction::zeros(V0.grid())),
                           0.0,
                           std::move(residuals),
                           0.0,
                           stats};
  }

  const int S = opts.homotopy_steps;
  const double min_step = 1.0 / (64.0 * static_cast<double>(S));
  double s_done = 0.0;
  double step = 1.0 / static_cast<double>(S);
  std::vector<double> c(static_cast<std::size_t>(m), 0.0);
  ScfResult final_state{V0, base, 0, 0.0};
  double last_failure_residual = 0.0;

  while (s_done < 1.0) {
    const double s_try = std::min(1.0, s_done + step);
    std::vector<double> step_targets(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      step_targets[static_cast<std::size_t>(k)] =
          (1.0 - s_try) * base_eigs[static_cast<std::size_t>(k)] + s_try * targets[static_cast<std::size_t>(k)];
    }

    NewtonOutcome outcome;
    bool scf_failed = false;
    try {
      outcome = newton_solve(c, V0, step_targets, opts, stats, s_try == 1.0 ? &final_state : nullptr);
    } catch (const NonConvergenceError& err) {
      scf_failed = true;
      last_failure_residual = err.last_residual;
    }

    if (!scf_failed && outcome.converged) {
      c = std::move(outcome.c);
      s_done = s_try;
      ++stats.homotopy_steps_taken;
      step = std::min(1.0 / static_cast<double>(S), 1.0 - s_done);
      continue;
    }

    if (!scf_failed) last_failure_residual = outcome.last_residual;
    step *= 0.5;
    ++stats.homotopy_bisections;
    if (step < min_step) {
      std::ostringstream msg;
      msg << "solve_inverse: homotopy step underflow at s=" << s_done << " (step " << step
          << " < " << min_step << ", last constraint residual " << last_failure_residual << ")";
      throw NonConvergenceError(msg.str(), last_failure_residual, stats.newton_iterations);
    }
  }

  // The last Newton convergence check already solved the SCF problem at the
  // final c; reuse that state. u_j and V_hat are built from the same arrays so
  // the reconstruction identity V_hat = V0 - sum sigma_j u_j^2 is exact at the
  // nodes. Coefficients below the sigma threshold are zeroed throughout.
  std::vector<double> c_eff = c;
  std::vector<int> sigma(static_cast<std::size_t>(m), 0);
  for (int j = 0; j < m; ++j) {
    if (std::abs(c_eff[static_cast<std::size_t>(j)]) < opts.sigma_threshold) {
      c_eff[static_cast<std::size_t>(j)] = 0.0;
    } else {
      sigma[static_cast<std::size_t>(j)] = c_eff[static_cast<std::size_t>(j)] > 0.0 ? -1 : 1;
    }
  }

  std::vector<SampledFunction> u_hat;
  u_hat.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    if (sigma[static_cast<std::size_t>(j)] == 0) {
      u_hat.push_back(SampledFunction::zeros(V0.grid()));
    } else {
      const double scale = std::sqrt(std::abs(c_eff[static_cast<std::size_t>(j)]));
      u_hat.push_back(scale * final_state.spectrum.phi(j + 1));
    }
  }

  std::vector<double> v_hat_values = V0.values();
  for (int j = 0; j < m; ++j) {
    if (sigma[static_cast<std::size_t>(j)] == 0) continue;
    const auto& u = u_hat[static_cast<std::size_t>(j)].values();
    const double s = static_cast<double>(sigma[static_cast<std::size_t>(j)]);
    for (std::size_t i = 0; i < v_hat_values.size(); ++i) v_hat_values[i] -= s * u[i] * u[i];
  }
  SampledFunction V_hat(V0.grid(), std::move(v_hat_values));

  Spectrum spectrum = lowest_eigenpairs(V_hat, m);
  std::vector<double> residuals(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) {
    residuals[static_cast<std::size_t>(k - 1)] =
        std::abs(spectrum.eigenvalue(k) - targets[static_cast<std::size_t>(k - 1)]);
  }
  const double distance = l2_norm(V_hat - V0);
  const double stationarity = stationarity_residual(V_hat, V0, spectrum);

  return InverseSolution{std::move(V_hat), std::move(spectrum),  Coefficients{std::move(c_eff)},
                         std::move(sigma), std::move(u_hat),     distance,
                         std::move(residuals), stationarity,     stats};
}

}  // namespace optpot
