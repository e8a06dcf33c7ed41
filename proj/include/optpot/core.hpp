#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace optpot {

struct GridMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InputFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvergenceError : std::runtime_error {
  NonConvergenceError(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what), last_residual(last_residual), iterations(iterations) {}
  double last_residual;
  int iterations;
};

struct InternalConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Uniform grid of n interior nodes on (0, L); the endpoints carry the
/// Dirichlet boundary and are never stored.
class Grid {
 public:
  Grid(double length, int interior_points);

  double L() const { return length_; }
  int n() const { return n_; }
  double h() const { return h_; }

  /// Position of the i-th interior node (0-based): x = (i+1)*h.
  double node(int i) const { return static_cast<double>(i + 1) * h_; }
  std::vector<double> nodes() const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.length_ == b.length_ && a.n_ == b.n_;
  }

 private:
  double length_;
  int n_;
  double h_;
};

Grid make_grid(double L, int n);

/// Real function given by its values at the interior nodes of a Grid.
/// Dirichlet-type functions are implicitly zero at the endpoints; potentials
/// extend by nearest value. All entries are finite by construction.
class SampledFunction {
 public:
  SampledFunction(Grid grid, std::vector<double> values);

  static SampledFunction zeros(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  Grid grid_;
  std::vector<double> values_;
};

SampledFunction operator+(const SampledFunction& f, const SampledFunction& g);
SampledFunction operator-(const SampledFunction& f, const SampledFunction& g);
SampledFunction operator*(double a, const SampledFunction& f);
SampledFunction squared(const SampledFunction& f);

/// Trapezoid approximation of the L2 scalar product on (0, L) with implicit
/// zero boundary values: h * sum_i f_i g_i.
double inner_product(const SampledFunction& f, const SampledFunction& g);
double l2_norm(const SampledFunction& f);
double sup_norm(const SampledFunction& f);
double sup_distance(const SampledFunction& f, const SampledFunction& g);

/// FNV-1a over grid parameters and sample bytes; identifies a potential.
std::uint64_t content_hash(const SampledFunction& f);

// Prior-potential presets.
struct ZeroPotential {};
struct ConstantPotential {
  double value;
};
struct HarmonicPotential {
  double a;
  double center;
};
struct SquareWellPotential {
  double depth;
  double left;
  double right;
};
struct SamplesPotential {
  std::string path;
};

using PotentialSpec = std::variant<ZeroPotential, ConstantPotential, HarmonicPotential,
                                   SquareWellPotential, SamplesPotential>;

/// Evaluate a potential preset at the interior nodes. File-backed samples are
/// linearly interpolated and clamped to the nearest sample outside their range.
SampledFunction sample_potential(const PotentialSpec& spec, const Grid& grid);

}  // namespace optpot
