#pragma once

// Smoothing kernels kappa(s, y) >= 0 on the time axis.  The primitive
// K(x, y) = int_0^x kappa(s, y) ds turns a point mass a delta_y into the
// absolutely continuous line measure with cumulative t -> a K(t, y), which is
// how discrete hazard atoms become hazard-rate contributions.
//
// The declared constants encode the regularity the constructions rely on:
// kappa <= bound everywhere, kappa >= act_floor on the activation window
// (y, y + act_delta), and kappa(s, b) = 0 whenever s <= t and b > cutoff(t),
// so locations beyond cutoff(t) are invisible below t.

#include <functional>
#include <memory>
#include <string>

#include "minid/extended.hpp"
#include "minid/line.hpp"
#include "minid/measure.hpp"

namespace minid {

struct Kernel {
  std::string name;
  std::function<double(double, double)> eval;      // kappa(s, y)
  std::function<double(double, double)> primitive; // K(x, y) = int_0^x kappa(s, y) ds
  double bound = kInf;    // C with kappa(s, y) <= C
  double act_delta = 0;   // kappa(s, y) >= act_floor for s in (y, y + act_delta)
  double act_floor = 0;
  std::function<double(double)> cutoff; // smallest B with kappa(s, b) = 0 for s <= t, b > B
  std::function<double(double)> total;  // K(inf, y); kInf when the smoothing never exhausts
  std::function<double(double)> start;  // infimum of the support of kappa(., y)
  bool attested = false; // user-supplied kernel: skip the numeric condition check
};

Kernel make_dykstra_laud_kernel(double tau);          // tau 1{s >= y}
Kernel make_rectangular_kernel(double a, double tau); // a 1{|s - y| <= tau}
Kernel make_ou_kernel(double tau); // sqrt(2 tau) e^{-tau(s-y)} 1{s >= y}

// Spot-checks the declared bound, activation window, cutoff, start, and
// primitive against eval on a grid; throws std::invalid_argument naming the
// violated clause.  Attested kernels pass untouched.
void check_kernel(const Kernel& k);

// The line measure (a delta_y)^{(kappa)}: cumulative t -> a K(t, y).
LinePtr smoothed_atom_line(double a, double y, const Kernel& k);

// eta^{(kappa)} for a univariate measure eta: density s -> int kappa(s, y)
// eta(dy).  Exact sums for atomic eta, quadrature against a line density
// otherwise.  start must be nondecreasing in y (all presets qualify).
LinePtr kernel_smooth_line(const MeasurePtr& eta, const Kernel& k);

// int K(t, b) eta(db): the mass eta^{(kappa)} places at or below t.
double smoothed_mass_at(const ExponentMeasure& eta, const Kernel& k, double t);
double smoothed_mass_at(const LineMeasure& locations, const Kernel& k, double t);

// The unique line of a univariate measure: atomic lists become Atomic1D,
// one-line bundles pass through, zero measures give nullptr.
LinePtr as_line_1d(const MeasurePtr& m);

// Locations restricted to (-inf, B]: capped cumulative, exact for atoms.
LinePtr cap_line(const LinePtr& base, double B);

} // namespace minid
