#include "optpot/derivative.hpp"

#include <cmath>

namespace optpot {

SampledFunction eigenvalue_gradient(const SampledFunction& V, int k) {
  if (k < 1) throw std::invalid_argument("eigenvalue_gradient: k must be >= 1");
  const Spectrum spectrum = lowest_eigenpairs(V, k);
  return squared(spectrum.phi(k));
}

double directional_derivative(const SampledFunction& V, int k, const SampledFunction& h) {
  return inner_product(eigenvalue_gradient(V, k), h);
}

double finite_difference_check(const SampledFunction& V, int k, const SampledFunction& h, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("finite_difference_check: t must be positive");
  const double e_plus = lowest_eigenpairs(V + t * h, k).eigenvalue(k);
  const double e_minus = lowest_eigenpairs(V - t * h, k).eigenvalue(k);
  const double fd = (e_plus - e_minus) / (2.0 * t);
  const double analytic = directional_derivative(V, k, h);
  return std::abs(fd - analytic) / (1.0 + std::abs(analytic));
}

GramMatrix gram_from_spectrum(const Spectrum& spectrum, std::uint64_t potential_hash) {
  const int m = spectrum.size();
  std::vector<SampledFunction> squares;
  squares.reserve(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) squares.push_back(squared(spectrum.phi(k)));

  linalg::Matrix g(m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const double v = inner_product(squares[static_cast<std::size_t>(i)],
                                     squares[static_cast<std::size_t>(j)]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  const double smallest = linalg::jacobi_eigenvalues(g).front();
  return GramMatrix{m, std::move(g), smallest, potential_hash};
}

GramMatrix gram_matrix(const SampledFunction& V, int m) {
  if (m < 1) throw std::invalid_argument("gram_matrix: m must be >= 1");
  return gram_from_spectrum(lowest_eigenpairs(V, m), content_hash(V));
}

}  // namespace optpot
