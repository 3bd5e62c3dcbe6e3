#pragma once

// Jump-size intensities rho(a) da on (0, inf) for CRM-type families.  The
// tail mass and its generalized inverse drive the decreasing-size atom sweep;
// the first moment below a cutoff bounds the omitted mass of a truncated
// realization.

#include <functional>
#include <optional>
#include <string>

#include "minid/extended.hpp"
#include "minid/rng.hpp"

namespace minid {

struct JumpDensity {
  std::string name;
  std::function<double(double)> dens;     // rho(a), a > 0
  std::function<double(double)> tail;     // rho((x, inf)); may be inf as x -> 0
  std::function<double(double)> inv_tail; // generalized inverse of tail
  // int_0^x a rho(a) da; a return of kInf is the symbolic divergence flag.
  std::function<double(double)> first_moment_below;
  double total = kInf; // tail(0+); finite means finite activity
  // int min{a,1} rho(a) da: engaged closed form when set, kInf = provably
  // divergent, nullopt = integrate numerically.
  std::optional<double> min1;
  // Laplace exponent phi(u) = int (1 - e^{-ua}) rho(a) da and its first
  // derivative, when available in closed form.
  std::function<double(double)> phi;
  std::function<double(double)> phi_prime;
  // Supremum of u with int (e^{ua} - 1) rho(a) da finite; 0 claims nothing.
  // Laplace queries with negative weights are admitted strictly below it.
  double exp_rate = 0;
  // int a^p e^{-t a} rho(a) da and one draw from its normalized density,
  // when closed forms exist.  These are the per-size factors of posterior
  // component measures; the free helpers below fall back to quadrature and
  // inverse-CDF bisection when the fields are unset.
  std::function<double(double, double)> tilted_moment;       // (p, t)
  std::function<double(double, double, Rng&)> tilted_sample; // (p, t, rng)
};

// int a^p e^{-t a} rho(a) da; p >= 1 keeps the integrand summable at zero
// under infinite-activity intensities.  kInf flags provable divergence.
double jump_tilted_moment(const JumpDensity& rho, double p, double t);

// One draw proportional to a^p e^{-t a} rho(a) da; throws when the
// normalizing mass is not finite and positive.
double jump_tilted_sample(const JumpDensity& rho, double p, double t, Rng& rng);

// rho(a) = c a^{-1} e^{-beta a} (gamma process scale/rate form).
JumpDensity make_gamma_jumps(double c = 1, double beta = 1);

// rho(a) = a^{-1-sigma}, sigma in (0,1).
JumpDensity make_stable_jumps(double sigma);

// rho(a) = c rate e^{-rate a}: finite activity with total mass c.
JumpDensity make_exponential_jumps(double c, double rate);

} // namespace minid
