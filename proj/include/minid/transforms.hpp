#pragma once

// Transformation calculus for exponent measures: componentwise monotone
// images, reweighting by a nonnegative bounded function, and smoothing of one
// measure by another.  Each returns a measure whose orthant masses (and,
// where the representation allows, densities and samplers) reflect the
// transformed object exactly.

#include <functional>

#include "minid/measure.hpp"

namespace minid {

// Componentwise non-decreasing map of E_d with g(inf) = inf.  The inverse
// slots are optional; missing ones are computed as the left-continuous
// generalized inverse inf{s : g(s) >= t} by bisection.  The certificate flag
// is the caller's assertion of monotonicity and is required.
struct MonotoneMap {
  std::vector<std::function<double(double)>> fwd;
  std::vector<std::function<double(double)>> inv;
  bool certified_monotone = false;

  double apply(int i, double t) const { return t == kInf ? kInf : fwd[i](t); }
  double inverse(int i, double t) const; // left-continuous generalized inverse
};

MeasurePtr image_transform(MeasurePtr eta, const MonotoneMap& g);

// Reweighted measure A -> integral_A g d(eta); g must be nonnegative and
// bounded on orthant complements (negativity is spot-checked at evaluation).
MeasurePtr reweight(MeasurePtr eta, std::function<double(const Point&)> g);

// Smoothed measure A -> integral_A eta((-inf,x]) beta(dx); beta must be
// atomic or line-density.
MeasurePtr smooth(MeasurePtr eta, MeasurePtr beta);

} // namespace minid
