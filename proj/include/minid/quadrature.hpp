#pragma once

// One-dimensional integration: adaptive Gauss-Kronrod 7-15 on finite
// intervals, a rational map for half-lines, and fixed Gauss-Legendre grids
// for the kernel integrals that are evaluated many times on one support.

#include <functional>
#include <utility>
#include <vector>

namespace minid {

struct QuadResult {
  double value = 0;
  double err = 0;
  bool converged = true;
};

using Fn1 = std::function<double(double)>;

QuadResult integrate(const Fn1& f, double a, double b, double rel_tol = 1e-10,
                     double abs_tol = 1e-13, int max_segments = 2000);

// integral_a^inf f, via t -> a + t/(1-t).
QuadResult integrate_semi(const Fn1& f, double a, double rel_tol = 1e-10,
                          double abs_tol = 1e-13, int max_segments = 2000);

// Gauss-Legendre nodes and weights on [a, b].
struct GlGrid {
  std::vector<double> x;
  std::vector<double> w;
};
GlGrid gl_nodes(int n, double a, double b);

} // namespace minid
