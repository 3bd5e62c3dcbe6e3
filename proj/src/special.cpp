#include "minid/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace minid {

namespace {
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
} // namespace

double expint_e1(double x) {
  if (!(x >= 0)) throw std::invalid_argument("expint_e1: x must be >= 0");
  if (x == 0) return std::numeric_limits<double>::infinity();
  if (x > 700) return 0.0; // underflows; exp(-700)/700 ~ 1e-307
  return -std::expint(-x);
}

double expint_e1_inv(double y) {
  if (!(y > 0)) throw std::invalid_argument("expint_e1_inv: y must be > 0");
  // Small-x branch: E1(x) = -gamma - log x + O(x), so for large y the root is
  // exp(-gamma - y) up to a factor 1 + O(x).
  if (y > 35) return std::exp(-kEulerGamma - y);
  // Large-x branch: E1(x) ~ e^{-x}/x; iterate x = -log(y) - log(x).
  if (y < 1e-14) {
    double x = -std::log(y);
    for (int it = 0; it < 40; ++it) x = -std::log(y) - std::log(x);
    return x;
  }
  // Newton on f(x) = log E1(x) - log y with a bisection bracket.
  double lo = 1e-300, hi = 700, x = (y > 1) ? std::exp(-kEulerGamma - y) : -std::log(y) + 1.0;
  if (!(x > lo && x < hi)) x = 1.0;
  double target = std::log(y);
  for (int it = 0; it < 80; ++it) {
    double e1 = expint_e1(x);
    double f = std::log(e1) - target;
    if (f > 0) lo = x; // E1 decreasing: f > 0 means x too small
    else hi = x;
    double deriv = -std::exp(-x) / (x * e1); // d/dx log E1
    double step = f / deriv;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) <= 1e-15 * x) return xn;
    x = xn;
  }
  return x;
}

// Acklam's rational approximation with one Halley refinement.
double norm_ppf(double p) {
  if (!(p > 0 && p < 1)) throw std::invalid_argument("norm_ppf: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // Halley step against the exact CDF expressed through erfc.
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  x = x - u / (1 + x * u / 2);
  return x;
}

double logsumexp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v)
    if (x > m) m = x;
  if (m == kNegInf) return kNegInf;
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double log1mexp(double x) {
  if (!(x > 0)) throw std::invalid_argument("log1mexp: x must be > 0");
  // Split at log 2 per the usual stability analysis.
  if (x <= 0.6931471805599453) return std::log(-std::expm1(-x));
  return std::log1p(-std::exp(-x));
}

double log1pexp(double x) {
  if (x > 35) return x;
  if (x < -35) return std::exp(x);
  return std::log1p(std::exp(x));
}

} // namespace minid
