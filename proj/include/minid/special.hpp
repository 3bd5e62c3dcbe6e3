#pragma once

// Scalar special functions used by truncation sweeps, jump densities, and the
// inverse-CDF samplers.

#include <vector>

namespace minid {

// E1(x) = integral_x^inf e^{-t}/t dt for x > 0.
double expint_e1(double x);

// Inverse of E1 on (0, inf): returns x with E1(x) = y.  Accepts any y > 0;
// results below ~1e-300 flush to 0 (callers treat that as an exhausted jump
// sweep).
double expint_e1_inv(double y);

// Standard normal quantile, p in (0,1).
double norm_ppf(double p);

// log(sum exp(v)) with empty input mapping to -inf.
double logsumexp(const std::vector<double>& v);

// log(1 - e^{-x}) for x > 0, stable near both ends.
double log1mexp(double x);

// log(1 + e^{x}).
double log1pexp(double x);

} // namespace minid
