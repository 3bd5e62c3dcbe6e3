#pragma once

// Analytic prior summaries: the joint Laplace transform of the random
// hazard masses, its mixed moments, mean-functional moments of univariate
// survival priors, and a Monte Carlo association diagnostic.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "minid/levy.hpp"

namespace minid {

// E[prod_i S_mu(x_i)^{z_i}], so weights z against orthant complements of the
// probe points.  Negative weights ask for exponential moments and are only
// admitted when every family certifies them.
struct LaplaceQuery {
  std::vector<Point> points;
  std::vector<double> weights;
};

double laplace_transform(const LevyCharacteristics& chars, const LaplaceQuery& q);

// E[prod_i mu(C_i)^{j_i}].  Exact cumulant assembly when every family knows
// its product-mass functionals; otherwise Richardson-extrapolated central
// differences of the Laplace transform in the weights.
struct HazardMomentResult {
  double value = 0;
  double err = 0; // Richardson disagreement; 0 on the exact path
  bool exact = false;
};

HazardMomentResult hazard_moments(const LevyCharacteristics& chars,
                                  const std::vector<Point>& points,
                                  const std::vector<int>& orders);

// Nondecreasing map of the time axis with f(0) >= 0 and f(inf) = inf; inv is
// its generalized inverse.  certified is the caller's attestation of those
// conditions, nothing more is checked.
struct MonotoneFn {
  std::string name;
  std::function<double(double)> fwd;
  std::function<double(double)> inv;
  bool certified = false;
};

MonotoneFn identity_fn();

// E[(int f dF_mu)^m] for the univariate random distribution with survival
// S_mu: the m-fold tail integral of the Laplace transform at pulled-back
// probe points.  Throws when the integrand tail never decays, which is how
// an almost surely defective F_mu shows up.
double mean_functional_moment(const LevyCharacteristics& chars, const MonotoneFn& f, int m);

// Sample covariances of survival values and of joint survival indicators at
// point pairs.  Association of the prior makes every population value
// nonnegative, so an estimate below -3 SE flags a failure.
struct PairAssociation {
  double cov_surv = 0, se_surv = 0;
  double cov_event = 0, se_event = 0;
  bool fail = false;
};

struct AssociationReport {
  std::vector<PairAssociation> pairs;
  bool pass = true;
};

AssociationReport association_diagnostic(const LevyCharacteristics& chars,
                                         const std::vector<std::pair<Point, Point>>& pairs,
                                         int n_draws, const TruncationPolicy& pol, Rng& rng);

} // namespace minid
