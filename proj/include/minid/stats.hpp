#pragma once

// Small sample-diagnostic utilities shared by tests, validation reports, and
// the CLI: two-sample Kolmogorov-Smirnov and empirical survival curves that
// tolerate infinite entries.

#include <vector>

namespace minid {

struct KsResult {
  double stat; // sup-norm distance of the empirical CDFs
  double p;    // asymptotic two-sample p-value
};

// Both samples may contain +inf entries (ties at inf are handled by mass
// comparison at the top).
KsResult two_sample_ks(std::vector<double> a, std::vector<double> b);

// P-hat(X > t) with exact handling of inf observations.
double empirical_survival(const std::vector<double>& sample, double t);

} // namespace minid
