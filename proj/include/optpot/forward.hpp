#pragma once

#include "optpot/core.hpp"

namespace optpot {

/// Symmetric tridiagonal 3-point discretization of -d^2/dx^2 + V on the
/// interior nodes, Dirichlet values eliminated.
struct TridiagonalOperator {
  Grid grid;
  std::vector<double> diag;  // 2/h^2 + V_i
  double offdiag;            // -1/h^2

  double inf_norm() const;
};

TridiagonalOperator assemble(const SampledFunction& V);

/// Number of eigenvalues strictly below E, by the Sturm-sequence pivot
/// recurrence with an underflow guard. Exact count, monotone in E.
int count_below(const TridiagonalOperator& T, double E);

struct EigenPair {
  int k;               // 1-based index
  double E;            // eigenvalue
  SampledFunction phi;  // unit L2 norm, first nonzero sample positive
  int nodes;           // interior sign changes, equals k-1
};

class Spectrum {
 public:
  explicit Spectrum(std::vector<EigenPair> pairs);

  int size() const { return static_cast<int>(pairs_.size()); }
  const std::vector<EigenPair>& pairs() const { return pairs_; }
  const EigenPair& pair(int k) const { return pairs_.at(static_cast<std::size_t>(k - 1)); }
  double eigenvalue(int k) const { return pair(k).E; }
  const SampledFunction& phi(int k) const { return pair(k).phi; }
  std::vector<double> eigenvalues() const;

 private:
  std::vector<EigenPair> pairs_;
};

/// First m Dirichlet eigenpairs of -d^2/dx^2 + V. Eigenvalues are isolated by
/// bisection on count_below (index-correct by construction); eigenvectors by
/// inverse iteration with one Gram-Schmidt pass against lower modes.
Spectrum lowest_eigenpairs(const SampledFunction& V, int m);

}  // namespace optpot
