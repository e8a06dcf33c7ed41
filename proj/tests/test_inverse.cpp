#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "optpot/inverse.hpp"

using namespace optpot;

namespace {

constexpr double kPi = std::numbers::pi;

SampledFunction sampled(const Grid& g, double (*f)(double)) {
  std::vector<double> v(static_cast<std::size_t>(g.n()));
  for (int i = 0; i < g.n(); ++i) v[static_cast<std::size_t>(i)] = f(g.node(i));
  return SampledFunction(g, std::move(v));
}

}  // namespace

TEST_CASE("target sets must increase strictly") {
  CHECK_NOTHROW(TargetSet({1.0, 2.0, 3.0}));
  CHECK_THROWS_AS(TargetSet({5.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(TargetSet({1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(TargetSet({}), std::invalid_argument);
}

TEST_CASE("solver options are validated") {
  SolverOptions opts;
  CHECK_NOTHROW(opts.validate());
  opts.scf_damping = 1.5;
  CHECK_THROWS_AS(opts.validate(), std::invalid_argument);
  opts = SolverOptions{};
  opts.newton_tol = -1.0;
  CHECK_THROWS_AS(opts.validate(), std::invalid_argument);
}

TEST_CASE("scf at zero coefficients returns the prior in one pass") {
  const Grid g = make_grid(kPi, 400);
  const SampledFunction v0 = sample_potential(SquareWellPotential{-4.0, 1.0, 2.0}, g);
  const ScfResult r = scf_fixed_point(Coefficients{{0.0, 0.0}}, v0, SolverOptions{});
  CHECK(r.iterations == 1);
  CHECK(sup_distance(r.V, v0) == 0.0);
  CHECK(r.spectrum.size() == 2);
}

TEST_CASE("scf self-consistency for a single mode") {
  const Grid g = make_grid(kPi, 800);
  const SampledFunction v0 = SampledFunction::zeros(g);
  const SolverOptions opts;
  const ScfResult r = scf_fixed_point(Coefficients{{0.1}}, v0, opts);

  // residual of the fixed-point equation, recomputed from scratch
  const SampledFunction mapped = v0 + 0.1 * squared(r.spectrum.phi(1));
  CHECK(sup_distance(r.V, mapped) <= opts.scf_tol);
  // raising the potential raises E_1
  CHECK(r.spectrum.eigenvalue(1) > 1.0);
}

TEST_CASE("scf reports non-convergence for runaway coefficients") {
  const Grid g = make_grid(kPi, 300);
  const SampledFunction v0 = SampledFunction::zeros(g);
  SolverOptions opts;
  opts.scf_max_iter = 80;
  CHECK_THROWS_AS(scf_fixed_point(Coefficients{{1e6}}, v0, opts), NonConvergenceError);
}

TEST_CASE("reduced residual at zero coefficients") {
  const SolverOptions opts;

  const Grid g = make_grid(kPi, 800);
  const SampledFunction well = sample_potential(SquareWellPotential{-4.0, 1.0, 2.0}, g);
  const Spectrum s = lowest_eigenpairs(well, 2);
  const std::vector<double> f0 =
      reduced_residual(Coefficients{{0.0, 0.0}}, well, TargetSet(s.eigenvalues()), opts);
  for (double f : f0) CHECK(std::abs(f) <= 1e-12);

  const Grid g2 = make_grid(kPi, 4001);
  const SampledFunction zero = SampledFunction::zeros(g2);
  const std::vector<double> f1 = reduced_residual(Coefficients{{0.0}}, zero, TargetSet({2.0}), opts);
  CHECK(f1[0] == doctest::Approx(-1.0).epsilon(1e-6));

  const std::vector<double> f2 =
      reduced_residual(Coefficients{{0.0, 0.0}}, zero, TargetSet({2.0, 5.0}), opts);
  CHECK(f2[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(f2[1] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("one-dimensional coefficient sweep: E_1 responds monotonically") {
  const Grid g = make_grid(kPi, 400);
  const SampledFunction v0 = SampledFunction::zeros(g);
  const SolverOptions opts;

  std::vector<double> cs, es;
  for (double c = -1.0; c <= 3.0 + 1e-12; c += 0.25) {
    const ScfResult r = scf_fixed_point(Coefficients{{c}}, v0, opts);
    cs.push_back(c);
    es.push_back(r.spectrum.eigenvalue(1));
  }
  int crossings = 0;
  for (std::size_t i = 1; i < es.size(); ++i) {
    CHECK(es[i] > es[i - 1]);
    if ((es[i - 1] - 2.0) * (es[i] - 2.0) < 0.0) ++crossings;
  }
  CHECK(crossings == 1);

  // The solver's coefficient lands inside the bracket found by the sweep.
  const InverseSolution sol = solve_inverse(v0, TargetSet({2.0}), opts);
  double lo = cs.front(), hi = cs.back();
  for (std::size_t i = 1; i < es.size(); ++i) {
    if ((es[i - 1] - 2.0) * (es[i] - 2.0) < 0.0) {
      lo = cs[i - 1];
      hi = cs[i];
    }
  }
  CHECK(sol.c.c[0] > lo);
  CHECK(sol.c.c[0] < hi);
}

TEST_CASE("trivial targets return the prior exactly") {
  const Grid g = make_grid(10.0, 900);
  const SampledFunction v0 = sample_potential(HarmonicPotential{4.0, 5.0}, g);
  const Spectrum s = lowest_eigenpairs(v0, 3);
  const InverseSolution sol = solve_inverse(v0, TargetSet(s.eigenvalues()), SolverOptions{});

  CHECK(sol.distance == 0.0);
  CHECK(sup_distance(sol.V_hat, v0) == 0.0);
  for (int j = 0; j < 3; ++j) {
    CHECK(sol.sigma[static_cast<std::size_t>(j)] == 0);
    CHECK(sol.c.c[static_cast<std::size_t>(j)] == 0.0);
    CHECK(sup_norm(sol.u_hat[static_cast<std::size_t>(j)]) == 0.0);
  }
  CHECK(sol.stationarity_residual == 0.0);
}

TEST_CASE("single prescribed eigenvalue above the base spectrum") {
  const Grid g = make_grid(kPi, 800);
  const SampledFunction v0 = SampledFunction::zeros(g);
  const SolverOptions opts;
  const InverseSolution sol = solve_inverse(v0, TargetSet({2.0}), opts);

  CHECK(sol.constraint_residuals[0] <= opts.newton_tol);
  CHECK(sol.c.c[0] > 0.0);
  CHECK(sol.sigma[0] == -1);
  CHECK(sol.stationarity_residual <= 1e-6);

  // V_hat = c phi_1^2 is nonnegative
  for (std::size_t i = 0; i < sol.V_hat.size(); ++i) CHECK(sol.V_hat[i] >= 0.0);

  // reconstruction identity at the nodes
  std::vector<double> rebuilt = v0.values();
  for (int j = 0; j < 1; ++j) {
    const auto& u = sol.u_hat[static_cast<std::size_t>(j)].values();
    for (std::size_t i = 0; i < rebuilt.size(); ++i) {
      rebuilt[i] -= static_cast<double>(sol.sigma[static_cast<std::size_t>(j)]) * u[i] * u[i];
    }
  }
  double max_err = 0.0;
  for (std::size_t i = 0; i < rebuilt.size(); ++i) {
    max_err = std::max(max_err, std::abs(rebuilt[i] - sol.V_hat[i]));
  }
  CHECK(max_err <= 1e-12);
}

TEST_CASE("two prescribed eigenvalues") {
  const Grid g = make_grid(kPi, 800);
  const SampledFunction v0 = SampledFunction::zeros(g);
  const SolverOptions opts;
  const InverseSolution sol = solve_inverse(v0, TargetSet({2.0, 5.0}), opts);

  CHECK(sol.constraint_residuals[0] <= opts.newton_tol);
  CHECK(sol.constraint_residuals[1] <= opts.newton_tol);
  CHECK(sol.stationarity_residual <= 1e-6);
  int total_sigma = 0;
  for (int s : sol.sigma) total_sigma += std::abs(s);
  CHECK(total_sigma >= 1);

  std::vector<double> rebuilt = v0.values();
  for (int j = 0; j < 2; ++j) {
    const auto& u = sol.u_hat[static_cast<std::size_t>(j)].values();
    for (std::size_t i = 0; i < rebuilt.size(); ++i) {
      rebuilt[i] -= static_cast<double>(sol.sigma[static_cast<std::size_t>(j)]) * u[i] * u[i];
    }
  }
  double max_err = 0.0;
  for (std::size_t i = 0; i < rebuilt.size(); ++i) {
    max_err = std::max(max_err, std::abs(rebuilt[i] - sol.V_hat[i]));
  }
  CHECK(max_err <= 1e-12);
}

TEST_CASE("a target off the base spectrum forces a nonzero sigma") {
  const Grid g = make_grid(kPi, 500);
  const SampledFunction v0 = SampledFunction::zeros(g);
  const SolverOptions opts;
  const Spectrum base = lowest_eigenpairs(v0, 1);
  const double target = base.eigenvalue(1) + 20.0 * opts.newton_tol;
  const InverseSolution sol = solve_inverse(v0, TargetSet({target}), opts);
  CHECK(std::abs(sol.sigma[0]) == 1);
}

TEST_CASE("finite-difference jacobian reaches the same solution") {
  const Grid g = make_grid(kPi, 500);
  const SampledFunction v0 = SampledFunction::zeros(g);
  SolverOptions fd;
  fd.use_fd_jacobian = true;
  const InverseSolution a = solve_inverse(v0, TargetSet({2.0}), SolverOptions{});
  const InverseSolution b = solve_inverse(v0, TargetSet({2.0}), fd);
  CHECK(a.c.c[0] == doctest::Approx(b.c.c[0]).epsilon(1e-7));
  CHECK(a.sigma[0] == b.sigma[0]);
}

TEST_CASE("stationarity residual: trivial, in-span and off-span cases") {
  const Grid g = make_grid(kPi, 800);
  const SampledFunction v0 = SampledFunction::zeros(g);

  const Spectrum base = lowest_eigenpairs(v0, 2);
  CHECK(stationarity_residual(v0, v0, base) == 0.0);

  const ScfResult scf = scf_fixed_point(Coefficients{{0.3}}, v0, SolverOptions{});
  CHECK(stationarity_residual(scf.V, v0, scf.spectrum) <= 1e-8);

  // sin(5x) lies mostly outside the low squared-mode span; the exact value
  // (about 0.93, limit 0.944 for small amplitudes) comes from the projection
  // oracle below, so the threshold here is only qualitative.
  const SampledFunction v_off = v0 + sampled(g, [](double x) { return std::sin(5.0 * x); });
  const Spectrum s_off = lowest_eigenpairs(v_off, 2);
  const double r = stationarity_residual(v_off, v0, s_off);
  CHECK(r >= 0.9);
  CHECK(r <= 1.0 + 1e-12);

  // independent projection oracle: 2x2 normal equations by Cramer's rule
  const SampledFunction w = v_off - v0;
  const SampledFunction q1 = squared(s_off.phi(1));
  const SampledFunction q2 = squared(s_off.phi(2));
  const double g11 = inner_product(q1, q1), g12 = inner_product(q1, q2), g22 = inner_product(q2, q2);
  const double b1 = inner_product(q1, w), b2 = inner_product(q2, w);
  const double det = g11 * g22 - g12 * g12;
  const double beta1 = (b1 * g22 - b2 * g12) / det;
  const double beta2 = (g11 * b2 - g12 * b1) / det;
  const SampledFunction rest = w - beta1 * q1 - beta2 * q2;
  const double expected = l2_norm(rest) / (l2_norm(w) + 1e-30);
  CHECK(r == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("unreachable targets fail with diagnostics instead of looping") {
  const Grid g = make_grid(kPi, 300);
  const SampledFunction v0 = SampledFunction::zeros(g);
  SolverOptions opts;
  opts.scf_max_iter = 40;
  opts.newton_max_iter = 6;
  opts.homotopy_steps = 2;
  bool threw = false;
  try {
    solve_inverse(v0, TargetSet({400.0}), opts);
  } catch (const NonConvergenceError& err) {
    threw = true;
    CHECK(err.last_residual > 0.0);
  }
  CHECK(threw);
}
