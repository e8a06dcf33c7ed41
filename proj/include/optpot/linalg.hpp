#pragma once

#include <vector>

namespace optpot::linalg {

/// Dense square matrix, row-major. Sized for the small systems that appear
/// here (constraint counts and coarse bases), not for the grid dimension.
class Matrix {
 public:
  explicit Matrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0) {}

  int dim() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

 private:
  int n_;
  std::vector<double> a_;
};

/// Gaussian elimination with partial pivoting. Throws ConditioningError when
/// the matrix is numerically singular.
std::vector<double> solve(Matrix a, std::vector<double> b);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> jacobi_eigenvalues(Matrix a);

}  // namespace optpot::linalg
