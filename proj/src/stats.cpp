#include "minid/stats.hpp"

#include <algorithm>
#include <cmath>

#include "minid/extended.hpp"

namespace minid {

namespace {

// Asymptotic tail of the Kolmogorov distribution, Q(lambda) = P(K > lambda).
double kolmogorov_tail(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double s = 0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, 2 * s));
}

} // namespace

KsResult two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    // Advance through the pooled order; ties (including at inf) advance both.
    double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::fabs(i / na - j / nb));
  }
  double en = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_tail((en + 0.12 + 0.11 / en) * d)};
}

double empirical_survival(const std::vector<double>& sample, double t) {
  std::size_t c = 0;
  for (double v : sample)
    if (v > t) ++c;
  return sample.empty() ? 1.0 : static_cast<double>(c) / static_cast<double>(sample.size());
}

} // namespace minid
