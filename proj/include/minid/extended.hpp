#pragma once

// Points of the extended orthant (-inf, inf]^d and the observation layout
// shared across the library.  A coordinate equal to +inf means "never
// occurred"; -inf and NaN are invalid everywhere.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace minid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Point of E_d.
using Point = std::vector<double>;

inline bool valid_coord(double v) { return !std::isnan(v) && v > -kInf; }

inline bool all_infinite(const Point& x) {
  for (double v : x)
    if (v != kInf) return false;
  return true;
}

inline void check_point(const Point& x, int d) {
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("point dimension mismatch");
  for (double v : x)
    if (!valid_coord(v)) throw std::invalid_argument("point coordinate must lie in (-inf, inf]");
}

// d x n observation matrix with an observed-cell mask.  Cells are addressed
// either as (row i, column j) or by the flat id i + d*j; rows index vector
// components, columns index exchangeable observations.
struct Obs {
  int d = 0;
  int n = 0;
  std::vector<double> val;        // column-major, size d*n
  std::vector<std::uint8_t> seen; // 1 = observed, same layout

  Obs() = default;
  Obs(int d_, int n_) : d(d_), n(n_), val(d_ * n_, kInf), seen(d_ * n_, 1) {}

  double at(int i, int j) const { return val[i + d * j]; }
  double& at(int i, int j) { return val[i + d * j]; }
  bool observed(int i, int j) const { return seen[i + d * j] != 0; }
  bool observed_cell(int c) const { return seen[c] != 0; }
  double cell_val(int c) const { return val[c]; }
  int row_of(int c) const { return c % d; }
  int col_of(int c) const { return c / d; }

  std::vector<int> observed_cells() const {
    std::vector<int> out;
    for (int c = 0; c < d * n; ++c)
      if (seen[c]) out.push_back(c);
    return out;
  }

  Point column(int j) const {
    Point x(d);
    for (int i = 0; i < d; ++i) x[i] = at(i, j);
    return x;
  }
};

} // namespace minid
