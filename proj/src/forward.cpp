#include "optpot/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace optpot {

namespace {

// Bisection stops at relative width 1e-13, inverse iteration at a residual of
// 1e-10 * ||T||_inf; both sit an order below the O(h^2) discretization error
// at the default resolutions.
constexpr double kBisectRelWidth = 1e-13;
constexpr double kResidualFactor = 1e-10;
constexpr int kMaxInverseIterations = 60;

}  // namespace

double TridiagonalOperator::inf_norm() const {
  const int n = static_cast<int>(diag.size());
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    const int neighbors = (i == 0 || i == n - 1) ? 1 : 2;
    m = std::max(m, std::abs(diag[static_cast<std::size_t>(i)]) + neighbors * std::abs(offdiag));
  }
  return m;
}

TridiagonalOperator assemble(const SampledFunction& V) {
  const Grid& grid = V.grid();
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  std::vector<double> diag(V.size());
  for (std::size_t i = 0; i < V.size(); ++i) diag[i] = 2.0 * inv_h2 + V[i];
  return TridiagonalOperator{grid, std::move(diag), -inv_h2};
}

int count_below(const TridiagonalOperator& T, double E) {
  const int n = static_cast<int>(T.diag.size());
  const double b2 = T.offdiag * T.offdiag;
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, b2);
  int count = 0;
  double d = T.diag[0] - E;
  if (std::abs(d) <= pivmin) d = -pivmin;
  if (d < 0.0) ++count;
  for (int i = 1; i < n; ++i) {
    d = (T.diag[static_cast<std::size_t>(i)] - E) - b2 / d;
    if (std::abs(d) <= pivmin) d = -pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

Spectrum::Spectrum(std::vector<EigenPair> pairs) : pairs_(std::move(pairs)) {
  for (std::size_t i = 1; i < pairs_.size(); ++i) {
    if (!(pairs_[i - 1].E < pairs_[i].E)) {
      throw InternalConsistencyError("Spectrum: eigenvalues not strictly increasing");
    }
  }
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs_.size(); ++j) {
      if (std::abs(inner_product(pairs_[i].phi, pairs_[j].phi)) > 1e-8) {
        throw InternalConsistencyError("Spectrum: eigenfunctions not orthogonal");
      }
    }
  }
}

std::vector<double> Spectrum::eigenvalues() const {
  std::vector<double> out(pairs_.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) out[i] = pairs_[i].E;
  return out;
}

namespace {

struct GershgorinBounds {
  double lo;
  double hi;
};

GershgorinBounds gershgorin(const TridiagonalOperator& T) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const double r = 2.0 * std::abs(T.offdiag);
  for (double d : T.diag) {
    lo = std::min(lo, d - r);
    hi = std::max(hi, d + r);
  }
  const double pad = 1e-8 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  return {lo - pad, hi + pad};
}

// k-th smallest eigenvalue: shrink [lo, hi] keeping count(lo) < k <= count(hi).
double bisect_kth(const TridiagonalOperator& T, int k, double lo, double hi) {
  while (hi - lo > kBisectRelWidth * (1.0 + 0.5 * (std::abs(lo) + std::abs(hi)))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at rounding resolution
    if (count_below(T, mid) >= k) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// LU factorization of T - shift*I with partial pivoting (two superdiagonals
// appear when rows swap). Tiny pivots are replaced, not rejected: for a shift
// at an eigenvalue the near-singular solve is exactly what inverse iteration
// wants.
struct ShiftedLU {
  std::vector<double> d;    // U diagonal
  std::vector<double> u1;   // U first superdiagonal
  std::vector<double> u2;   // U second superdiagonal
  std::vector<double> l;    // multipliers
  std::vector<char> swapped;
};

ShiftedLU factor_shifted(const TridiagonalOperator& T, double shift) {
  const int n = static_cast<int>(T.diag.size());
  const double b = T.offdiag;
  ShiftedLU f;
  f.d.resize(static_cast<std::size_t>(n));
  f.u1.assign(static_cast<std::size_t>(std::max(0, n - 1)), 0.0);
  f.u2.assign(static_cast<std::size_t>(std::max(0, n - 2)), 0.0);
  f.l.assign(static_cast<std::size_t>(std::max(0, n - 1)), 0.0);
  f.swapped.assign(static_cast<std::size_t>(std::max(0, n - 1)), 0);

  for (int i = 0; i < n; ++i) f.d[static_cast<std::size_t>(i)] = T.diag[static_cast<std::size_t>(i)] - shift;
  for (int i = 0; i + 1 < n; ++i) f.u1[static_cast<std::size_t>(i)] = b;

  for (int i = 0; i + 1 < n; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    if (std::abs(f.d[si]) >= std::abs(b)) {
      const double piv = f.d[si] != 0.0 ? f.d[si] : std::numeric_limits<double>::min();
      const double m = b / piv;
      f.l[si] = m;
      f.d[si + 1] -= m * f.u1[si];
      // u2 stays zero on a no-swap step
    } else {
      f.swapped[si] = 1;
      const double m = f.d[si] / b;
      f.l[si] = m;
      f.d[si] = b;
      const double old_u1 = f.u1[si];
      f.u1[si] = f.d[si + 1];
      if (i + 2 < n) {
        f.u2[si] = f.u1[si + 1];
        f.u1[si + 1] = -m * f.u1[si + 1];
      }
      f.d[si + 1] = old_u1 - m * f.d[si + 1];
    }
  }
  const double norm = T.inf_norm();
  const double floor = std::numeric_limits<double>::epsilon() * std::max(1.0, norm);
  for (double& v : f.d) {
    if (std::abs(v) < floor) v = (v < 0.0 ? -floor : floor);
  }
  return f;
}

void solve_shifted(const ShiftedLU& f, std::vector<double>& x) {
  const int n = static_cast<int>(f.d.size());
  for (int i = 0; i + 1 < n; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    if (!f.swapped[si]) {
      x[si + 1] -= f.l[si] * x[si];
    } else {
      std::swap(x[si], x[si + 1]);
      x[si + 1] -= f.l[si] * x[si];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    const std::size_t si = static_cast<std::size_t>(i);
    double s = x[si];
    if (i + 1 < n) s -= f.u1[si] * x[si + 1];
    if (i + 2 < n) s -= f.u2[si] * x[si + 2];
    x[si] = s / f.d[si];
  }
}

void apply(const TridiagonalOperator& T, const std::vector<double>& x, std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    double s = T.diag[si] * x[si];
    if (i > 0) s += T.offdiag * x[si - 1];
    if (i + 1 < n) s += T.offdiag * x[si + 1];
    y[si] = s;
  }
}

double euclidean_norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

struct VectorResult {
  std::vector<double> x;
  bool converged = false;
};

// Inverse iteration at the bisection midpoint. `lower` holds the grid-weighted
// orthonormal modes below k; one Gram-Schmidt pass per sweep keeps finite
// precision from mixing close modes.
VectorResult inverse_iteration(const TridiagonalOperator& T, double E,
                               const std::vector<const std::vector<double>*>& lower,
                               std::uint64_t seed) {
  const int n = static_cast<int>(T.diag.size());
  const double h = T.grid.h();
  const double target_residual = kResidualFactor * T.inf_norm();

  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = uni(gen);

  const ShiftedLU factor = factor_shifted(T, E);
  std::vector<double> work(static_cast<std::size_t>(n));

  VectorResult result;
  for (int iter = 0; iter < kMaxInverseIterations; ++iter) {
    solve_shifted(factor, x);
    for (const auto* phi : lower) {
      double proj = 0.0;
      for (int i = 0; i < n; ++i) proj += (*phi)[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      proj *= h;
      for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] -= proj * (*phi)[static_cast<std::size_t>(i)];
    }
    const double norm = euclidean_norm(x);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      for (double& v : x) v = uni(gen);  // degenerate start, reseed
      continue;
    }
    for (double& v : x) v /= norm;
    apply(T, x, work);
    double residual = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = work[static_cast<std::size_t>(i)] - E * x[static_cast<std::size_t>(i)];
      residual += r * r;
    }
    if (std::sqrt(residual) <= target_residual) {
      result.converged = true;
      break;
    }
  }
  result.x = std::move(x);
  return result;
}

int count_sign_changes(const std::vector<double>& x) {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  const double zero_tol = 1e-13 * scale;
  int changes = 0;
  int prev = 0;
  for (double v : x) {
    const int s = (v > zero_tol) ? 1 : (v < -zero_tol ? -1 : 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

void fix_sign(std::vector<double>& x) {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  const double zero_tol = 1e-13 * scale;
  for (double v : x) {
    if (std::abs(v) > zero_tol) {
      if (v < 0.0) {
        for (double& w : x) w = -w;
      }
      return;
    }
  }
}

}  // namespace

Spectrum lowest_eigenpairs(const SampledFunction& V, int m) {
  const int n = V.grid().n();
  if (m < 1) throw std::invalid_argument("lowest_eigenpairs: m must be >= 1");
  if (m > n) throw std::invalid_argument("lowest_eigenpairs: m exceeds the grid dimension");

  const TridiagonalOperator T = assemble(V);
  const auto bounds = gershgorin(T);
  const double h = V.grid().h();

  std::vector<EigenPair> pairs;
  pairs.reserve(static_cast<std::size_t>(m));
  std::vector<std::vector<double>> lower_modes;
  lower_modes.reserve(static_cast<std::size_t>(m));
  std::vector<const std::vector<double>*> lower;

  for (int k = 1; k <= m; ++k) {
    const double E = bisect_kth(T, k, bounds.lo, bounds.hi);

    SampledFunction phi = SampledFunction::zeros(V.grid());
    int nodes = -1;
    for (int attempt = 0; attempt < 2; ++attempt) {
      const std::uint64_t seed =
          0x9e3779b97f4a7c15ull ^ (static_cast<std::uint64_t>(k) << 8) ^ static_cast<std::uint64_t>(attempt);
      VectorResult vec = inverse_iteration(T, E, lower, seed);
      if (!vec.converged) {
        throw InternalConsistencyError("lowest_eigenpairs: inverse iteration failed to converge at k=" +
                                       std::to_string(k));
      }
      double s = 0.0;
      for (double v : vec.x) s += v * v;
      const double scale = 1.0 / std::sqrt(h * s);
      for (double& v : vec.x) v *= scale;
      fix_sign(vec.x);
      nodes = count_sign_changes(vec.x);
      phi = SampledFunction(V.grid(), std::move(vec.x));
      if (nodes == k - 1) break;
    }
    if (nodes != k - 1) {
      throw InternalConsistencyError("lowest_eigenpairs: node count " + std::to_string(nodes) +
                                     " for k=" + std::to_string(k) +
                                     " (discretization too coarse for this potential)");
    }
    pairs.push_back(EigenPair{k, E, phi, nodes});
    lower_modes.push_back(phi.values());
    lower.push_back(&lower_modes.back());
  }
  return Spectrum(std::move(pairs));
}

}  // namespace optpot
