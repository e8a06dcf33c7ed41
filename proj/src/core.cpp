#include "optpot/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace optpot {

Grid::Grid(double length, int interior_points) : length_(length), n_(interior_points) {
  if (!std::isfinite(length) || length <= 0.0) {
    throw std::invalid_argument("Grid: interval length must be positive and finite");
  }
  if (interior_points < 3) {
    throw std::invalid_argument("Grid: need at least 3 interior points");
  }
  h_ = length_ / static_cast<double>(n_ + 1);
}

std::vector<double> Grid::nodes() const {
  std::vector<double> xs(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) xs[static_cast<std::size_t>(i)] = node(i);
  return xs;
}

Grid make_grid(double L, int n) { return Grid(L, n); }

SampledFunction::SampledFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(grid_.n())) {
    throw std::invalid_argument("SampledFunction: value count does not match grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("SampledFunction: non-finite sample value");
    }
  }
}

SampledFunction SampledFunction::zeros(const Grid& grid) {
  return SampledFunction(grid, std::vector<double>(static_cast<std::size_t>(grid.n()), 0.0));
}

namespace {

void require_same_grid(const SampledFunction& f, const SampledFunction& g, const char* op) {
  if (!(f.grid() == g.grid())) {
    throw GridMismatchError(std::string(op) + ": operands live on different grids");
  }
}

}  // namespace

SampledFunction operator+(const SampledFunction& f, const SampledFunction& g) {
  require_same_grid(f, g, "operator+");
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] + g[i];
  return SampledFunction(f.grid(), std::move(out));
}

SampledFunction operator-(const SampledFunction& f, const SampledFunction& g) {
  require_same_grid(f, g, "operator-");
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] - g[i];
  return SampledFunction(f.grid(), std::move(out));
}

SampledFunction operator*(double a, const SampledFunction& f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * f[i];
  return SampledFunction(f.grid(), std::move(out));
}

SampledFunction squared(const SampledFunction& f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] * f[i];
  return SampledFunction(f.grid(), std::move(out));
}

double inner_product(const SampledFunction& f, const SampledFunction& g) {
  require_same_grid(f, g, "inner_product");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * g[i];
  return f.grid().h() * sum;
}

double l2_norm(const SampledFunction& f) { return std::sqrt(inner_product(f, f)); }

double sup_norm(const SampledFunction& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

double sup_distance(const SampledFunction& f, const SampledFunction& g) {
  require_same_grid(f, g, "sup_distance");
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g[i]));
  return m;
}

std::uint64_t content_hash(const SampledFunction& f) {
  constexpr std::uint64_t kOffset = 1469598103934665603ull;
  constexpr std::uint64_t kPrime = 1099511628211ull;
  std::uint64_t hash = kOffset;
  auto mix = [&hash](const void* p, std::size_t bytes) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < bytes; ++i) {
      hash ^= b[i];
      hash *= kPrime;
    }
  };
  const double length = f.grid().L();
  const std::int64_t n = f.grid().n();
  mix(&length, sizeof(length));
  mix(&n, sizeof(n));
  mix(f.values().data(), f.size() * sizeof(double));
  return hash;
}

namespace {

struct SampleTable {
  std::vector<double> x;
  std::vector<double> v;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    auto first = field.find_first_not_of(" \t\r");
    auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string()
                                                : field.substr(first, last - first + 1));
  }
  return fields;
}

double parse_double_field(const std::string& text, const std::string& path, int line_no) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &consumed);
  } catch (const std::exception&) {
    throw InputFormatError(path + ":" + std::to_string(line_no) + ": not a number: '" + text + "'");
  }
  if (consumed != text.size()) {
    throw InputFormatError(path + ":" + std::to_string(line_no) + ": trailing characters in '" +
                           text + "'");
  }
  if (!std::isfinite(value)) {
    throw InputFormatError(path + ":" + std::to_string(line_no) + ": non-finite value");
  }
  return value;
}

// Header must contain an "x" column and one of "v", "v_hat", "v0" (in that
// order of preference), so emitted potential.csv files reload directly.
SampleTable load_sample_table(const std::string& path, double L) {
  std::ifstream in(path);
  if (!in) throw InputFormatError("cannot open sample file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw InputFormatError(path + ": empty file");
  const auto header = split_csv_line(line);
  auto column_of = [&header](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int x_col = column_of("x");
  int v_col = column_of("v");
  if (v_col < 0) v_col = column_of("v_hat");
  if (v_col < 0) v_col = column_of("v0");
  if (x_col < 0 || v_col < 0) {
    throw InputFormatError(path + ": header must name an 'x' column and a 'v' (or 'v_hat'/'v0') column");
  }

  SampleTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw InputFormatError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }
    const double x = parse_double_field(fields[static_cast<std::size_t>(x_col)], path, line_no);
    const double v = parse_double_field(fields[static_cast<std::size_t>(v_col)], path, line_no);
    const double slack = 1e-9 * L;
    if (x < -slack || x > L + slack) {
      throw InputFormatError(path + ":" + std::to_string(line_no) + ": x=" + std::to_string(x) +
                             " outside [0, L]");
    }
    if (!table.x.empty() && x <= table.x.back()) {
      throw InputFormatError(path + ":" + std::to_string(line_no) + ": x values must be strictly increasing");
    }
    table.x.push_back(x);
    table.v.push_back(v);
  }
  if (table.x.empty()) throw InputFormatError(path + ": no sample rows");
  return table;
}

double interpolate_clamped(const SampleTable& table, double x) {
  if (x <= table.x.front()) return table.v.front();
  if (x >= table.x.back()) return table.v.back();
  const auto it = std::upper_bound(table.x.begin(), table.x.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - table.x.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - table.x[lo]) / (table.x[hi] - table.x[lo]);
  return table.v[lo] + t * (table.v[hi] - table.v[lo]);
}

}  // namespace

SampledFunction sample_potential(const PotentialSpec& spec, const Grid& grid) {
  std::vector<double> values(static_cast<std::size_t>(grid.n()));
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ZeroPotential>) {
          std::fill(values.begin(), values.end(), 0.0);
        } else if constexpr (std::is_same_v<P, ConstantPotential>) {
          if (!std::isfinite(p.value)) throw std::invalid_argument("constant potential: non-finite value");
          std::fill(values.begin(), values.end(), p.value);
        } else if constexpr (std::is_same_v<P, HarmonicPotential>) {
          if (!std::isfinite(p.a) || !std::isfinite(p.center)) {
            throw std::invalid_argument("harmonic potential: non-finite parameter");
          }
          for (int i = 0; i < grid.n(); ++i) {
            const double d = grid.node(i) - p.center;
            values[static_cast<std::size_t>(i)] = p.a * d * d;
          }
        } else if constexpr (std::is_same_v<P, SquareWellPotential>) {
          if (!(0.0 <= p.left && p.left < p.right && p.right <= grid.L())) {
            throw std::invalid_argument("square well requires 0 <= left < right <= L");
          }
          for (int i = 0; i < grid.n(); ++i) {
            const double x = grid.node(i);
            values[static_cast<std::size_t>(i)] = (p.left < x && x < p.right) ? p.depth : 0.0;
          }
        } else if constexpr (std::is_same_v<P, SamplesPotential>) {
          const SampleTable table = load_sample_table(p.path, grid.L());
          for (int i = 0; i < grid.n(); ++i) {
            values[static_cast<std::size_t>(i)] = interpolate_clamped(table, grid.node(i));
          }
        }
      },
      spec);
  return SampledFunction(grid, std::move(values));
}

}  // namespace optpot
