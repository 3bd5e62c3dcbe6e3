#include "minid/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "minid/special.hpp"

namespace minid {

double Rng::exponential() { return -std::log(uniform()); }

double Rng::normal() { return norm_ppf(uniform()); }

// Marsaglia-Tsang squeeze; shapes below one are lifted by one and rescaled.
double Rng::gamma(double shape) {
  if (!(shape > 0)) throw std::invalid_argument("gamma shape must be positive");
  if (shape < 1.0) {
    double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

namespace {

// Hormann's transformed rejection, valid for mean >= 10.
long poisson_ptrs(Rng& rng, double mu) {
  const double b = 0.931 + 2.53 * std::sqrt(mu);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mu = std::log(mu);
  for (;;) {
    double u = rng.uniform() - 0.5;
    double v = rng.uniform();
    double us = 0.5 - std::fabs(u);
    double k = std::floor((2.0 * a / us + b) * u + mu + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mu - mu - std::lgamma(k + 1.0))
      return static_cast<long>(k);
  }
}

} // namespace

long Rng::poisson(double mean) {
  if (!(mean >= 0)) throw std::invalid_argument("poisson mean must be nonnegative");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Inversion by sequential search.
    double p = std::exp(-mean), cdf = p, u = uniform();
    long k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (k > 2000) break; // cdf saturated in floating point
    }
    return k;
  }
  return poisson_ptrs(*this, mean);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("below(0)");
  // Rejection to avoid modulo bias.
  const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
  for (;;) {
    std::uint64_t x = next_u64();
    if (x < limit) return x % n;
  }
}

int Rng::categorical_log(const std::vector<double>& logw) {
  if (logw.empty()) throw std::invalid_argument("categorical over empty support");
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double m = neg_inf;
  for (double w : logw)
    if (w > m) m = w;
  if (m == neg_inf) throw std::invalid_argument("categorical: all weights zero");
  double total = 0;
  std::vector<double> cum(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) {
    total += std::exp(logw[i] - m);
    cum[i] = total;
  }
  double u = uniform() * total;
  for (std::size_t i = 0; i + 1 < cum.size(); ++i)
    if (u <= cum[i]) return static_cast<int>(i);
  return static_cast<int>(cum.size() - 1);
}

int Rng::categorical(const std::vector<double>& w) {
  if (w.empty()) throw std::invalid_argument("categorical over empty support");
  double total = 0;
  for (double v : w) {
    if (!(v >= 0)) throw std::invalid_argument("categorical: negative weight");
    total += v;
  }
  if (!(total > 0)) throw std::invalid_argument("categorical: all weights zero");
  double u = uniform() * total, acc = 0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    acc += w[i];
    if (u <= acc) return static_cast<int>(i);
  }
  return static_cast<int>(w.size() - 1);
}

} // namespace minid
