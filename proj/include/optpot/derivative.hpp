#pragma once

#include "optpot/forward.hpp"
#include "optpot/linalg.hpp"

namespace optpot {

/// Overlap matrix of squared eigenfunctions, G_ij = <phi_i^2, phi_j^2>.
/// Positive definiteness encodes their linear independence; the smallest
/// eigenvalue is computed alongside.
struct GramMatrix {
  int m;
  linalg::Matrix entries;
  double smallest_eigenvalue;
  std::uint64_t potential_hash;
};

/// Riesz representative of the derivative of E_k with respect to the
/// potential: phi_k^2 pointwise, for the unit-norm eigenfunction.
SampledFunction eigenvalue_gradient(const SampledFunction& V, int k);

/// <phi_k^2, h>: first-order response of E_k to the perturbation h.
double directional_derivative(const SampledFunction& V, int k, const SampledFunction& h);

/// Central-difference cross-check of the derivative formula:
/// |[E_k(V+t h) - E_k(V-t h)]/(2t) - <phi_k^2, h>| / (1 + |<phi_k^2, h>|).
/// Validation only; the solver never calls it.
double finite_difference_check(const SampledFunction& V, int k, const SampledFunction& h, double t);

GramMatrix gram_matrix(const SampledFunction& V, int m);
GramMatrix gram_from_spectrum(const Spectrum& spectrum, std::uint64_t potential_hash = 0);

}  // namespace optpot
