#include "minid/jumps.hpp"

#include <cmath>
#include <stdexcept>

#include "minid/quadrature.hpp"
#include "minid/special.hpp"

namespace minid {

JumpDensity make_gamma_jumps(double c, double beta) {
  if (!(c > 0) || !(beta > 0)) throw std::invalid_argument("gamma jumps need c, beta > 0");
  JumpDensity j;
  j.name = "gamma";
  j.dens = [c, beta](double a) { return a <= 0 ? 0.0 : c * std::exp(-beta * a) / a; };
  j.tail = [c, beta](double x) { return x <= 0 ? kInf : c * expint_e1(beta * x); };
  j.inv_tail = [c, beta](double y) { return expint_e1_inv(y / c) / beta; };
  j.first_moment_below = [c, beta](double x) { return c / beta * -std::expm1(-beta * x); };
  j.total = kInf;
  j.min1 = c * (-std::expm1(-beta) / beta + expint_e1(beta));
  j.phi = [c, beta](double u) { return c * std::log1p(u / beta); };
  j.phi_prime = [c, beta](double u) { return c / (beta + u); };
  j.exp_rate = beta;
  j.tilted_moment = [c, beta](double p, double t) {
    if (!(p > 0) || beta + t <= 0) return kInf;
    return c * std::exp(std::lgamma(p) - p * std::log(beta + t));
  };
  j.tilted_sample = [beta](double p, double t, Rng& rng) { return rng.gamma(p) / (beta + t); };
  return j;
}

JumpDensity make_stable_jumps(double sigma) {
  if (!(sigma > 0) || !(sigma < 1)) throw std::invalid_argument("stable index must lie in (0,1)");
  JumpDensity j;
  j.name = "stable";
  j.dens = [sigma](double a) { return a <= 0 ? 0.0 : std::pow(a, -1 - sigma); };
  j.tail = [sigma](double x) { return x <= 0 ? kInf : std::pow(x, -sigma) / sigma; };
  j.inv_tail = [sigma](double y) { return std::pow(sigma * y, -1 / sigma); };
  j.first_moment_below = [sigma](double x) { return std::pow(x, 1 - sigma) / (1 - sigma); };
  j.total = kInf;
  j.min1 = 1 / sigma + 1 / (1 - sigma);
  j.phi = [sigma](double u) { return std::tgamma(1 - sigma) / sigma * std::pow(u, sigma); };
  j.phi_prime = [sigma](double u) { return std::tgamma(1 - sigma) * std::pow(u, sigma - 1); };
  j.tilted_moment = [sigma](double p, double t) {
    if (!(p > sigma) || !(t > 0)) return kInf;
    return std::exp(std::lgamma(p - sigma) - (p - sigma) * std::log(t));
  };
  j.tilted_sample = [sigma](double p, double t, Rng& rng) { return rng.gamma(p - sigma) / t; };
  return j;
}

JumpDensity make_exponential_jumps(double c, double rate) {
  if (!(c > 0) || !(rate > 0)) throw std::invalid_argument("exponential jumps need c, rate > 0");
  JumpDensity j;
  j.name = "exponential";
  j.dens = [c, rate](double a) { return a <= 0 ? 0.0 : c * rate * std::exp(-rate * a); };
  j.tail = [c, rate](double x) { return x <= 0 ? c : c * std::exp(-rate * x); };
  j.inv_tail = [c, rate](double y) { return y >= c ? 0.0 : -std::log(y / c) / rate; };
  j.first_moment_below = [c, rate](double x) {
    if (x == kInf) return c / rate;
    return c / rate * (1 - std::exp(-rate * x) * (1 + rate * x));
  };
  j.total = c;
  j.min1 = c * -std::expm1(-rate) / rate;
  j.phi = [c, rate](double u) { return c * u / (rate + u); };
  j.phi_prime = [c, rate](double u) { return c * rate / ((rate + u) * (rate + u)); };
  j.exp_rate = rate;
  j.tilted_moment = [c, rate](double p, double t) {
    if (!(p >= 0) || rate + t <= 0) return kInf;
    return c * rate * std::exp(std::lgamma(p + 1) - (p + 1) * std::log(rate + t));
  };
  j.tilted_sample = [rate](double p, double t, Rng& rng) {
    return rng.gamma(p + 1) / (rate + t);
  };
  return j;
}

double jump_tilted_moment(const JumpDensity& rho, double p, double t) {
  if (rho.tilted_moment) return rho.tilted_moment(p, t);
  auto q = integrate_semi(
      [&](double a) {
        double dens = rho.dens(a);
        return dens == 0 ? 0.0 : dens * std::exp(p * std::log(a) - t * a);
      },
      0.0, 1e-9, 1e-13, 400);
  return q.converged ? q.value : kInf;
}

double jump_tilted_sample(const JumpDensity& rho, double p, double t, Rng& rng) {
  if (rho.tilted_sample) return rho.tilted_sample(p, t, rng);
  double total = jump_tilted_moment(rho, p, t);
  if (!(total > 0) || total == kInf)
    throw std::runtime_error("size reweighting has no finite normalizer for " + rho.name);
  auto cum = [&](double x) {
    return integrate(
               [&](double a) {
                 double dens = rho.dens(a);
                 return dens == 0 ? 0.0 : dens * std::exp(p * std::log(a) - t * a);
               },
               0.0, x, 1e-9, 1e-13, 400)
        .value;
  };
  double target = rng.uniform() * total;
  double hi = 1;
  for (int r = 0; cum(hi) < target; ++r) {
    if (r > 100) throw std::runtime_error("size reweighting quantile bracket ran away");
    hi *= 2;
  }
  double lo = 0;
  for (int r = 0; r < 80; ++r) {
    double mid = 0.5 * (lo + hi);
    (cum(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace minid
