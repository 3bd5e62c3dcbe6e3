#pragma once

// Subordinated CRM vectors: d conditionally independent homogeneous CRMs
// driven by a shared univariate root measure, assembled into a product-line
// exponent measure.  Unconditionally the assembly is again infinitely
// divisible, with Levy measure nu_1 + nu_2: nu_1 atoms are single smoothed
// jumps placed by the root BASE measure, nu_2 atoms are whole product-line
// measures built from one atom of the root Levy measure.

#include <optional>
#include <vector>

#include "minid/jumps.hpp"
#include "minid/kernels.hpp"
#include "minid/levy.hpp"

namespace minid {

// nu atoms (a delta_b)^{(kappa)} embedded on one axis; parameters (a, b)
// carry the intensity rho(a) da g0(db) with a univariate location measure g0.
class SmoothedCrmFamily : public AtomFamily {
 public:
  SmoothedCrmFamily(int d, int axis, JumpDensity rho, MeasurePtr g0, Kernel k);

  int dim() const override { return d_; }
  std::string describe() const override {
    return "smoothed_crm:" + rho_.name + ":" + k_.name;
  }
  double total_mass() const override;
  double integrate(const MeasureFn& F, bool* converged) const override;
  std::optional<double> mean_mass_functional(const Point& u) const override;
  std::optional<double> product_mass_functional(const std::vector<Point>& u,
                                                const std::vector<int>& mult) const override;
  std::vector<MeasurePtr> sample_prm_atoms(const TruncationPolicy& pol, Rng& rng,
                                           double* omitted) const override;

  int axis() const { return axis_; }
  const JumpDensity& jumps() const { return rho_; }
  const Kernel& kernel() const { return k_; }
  const MeasurePtr& locations() const { return g0_; }

  // The realized measure of one parameter point: (a delta_b)^{(kappa)} on
  // the family's axis.
  MeasurePtr atom_measure(double a, double b) const;

 private:
  int d_;
  int axis_;
  JumpDensity rho_;
  MeasurePtr g0_;
  Kernel k_;
};

struct SubordinationOptions {
  // Root smoothing kernel kappa_0; without it the root measure itself places
  // the inner jump locations.
  std::optional<Kernel> root_kernel;
  // Nested-MC integrator: inner draws per root atom, their truncation budget,
  // and the horizon the realizations are exact up to.
  int inner_draws = 64;
  double inner_eps = 1e-3;
  long inner_n_max = 200000;
  double horizon = 64.0;
};

// nu_2: one atom per atom of the root Levy measure.  A root atom eta_0 maps
// to the product-line measure of d independent CRMs with intensities
// rho_i(a) da eta_0^{(kappa_0)}(db), each margin smoothed by kappa_i.  The
// map is stochastic, so integration is nested Monte Carlo and sampled
// realizations are exact (within the policy's omitted-mass budget) on the
// lower orthant of the reference point and truncated beyond it.
class SubordinatedFamily : public AtomFamily {
 public:
  SubordinatedFamily(int d, FamilyPtr root, std::vector<JumpDensity> rhos,
                     std::vector<Kernel> kappas, SubordinationOptions opt);

  int dim() const override { return d_; }
  std::string describe() const override { return "subordinated:" + root_->describe(); }
  double total_mass() const override { return root_->total_mass(); }
  double integrate(const MeasureFn& F, bool* converged) const override;
  std::optional<double> mean_mass_functional(const Point& u) const override;
  std::vector<MeasurePtr> sample_prm_atoms(const TruncationPolicy& pol, Rng& rng,
                                           double* omitted) const override;

  // The product-line measure of one root atom: d inner CRM sweeps, margins
  // truncated to locations that are visible below t_ref.  *omitted
  // accumulates the expected mass the inner truncation drops there.
  MeasurePtr assemble(const ExponentMeasure& eta0, Rng& rng, const Point& t_ref,
                      double eps, long n_max, double* omitted) const;

  const FamilyPtr& root() const { return root_; }

 private:
  Rng inner_stream(const ExponentMeasure& eta0) const;
  double smoothed_k(const ExponentMeasure& eta0, int i, double t) const;

  int d_;
  FamilyPtr root_;
  std::vector<JumpDensity> rhos_;
  std::vector<Kernel> kappas_;
  SubordinationOptions opt_;
};

// Characteristics of the subordinated vector per the construction above:
// base zero, one smoothed-CRM family per axis fed by mu0's base measure, and
// one subordinated family per family of mu0.  mu0 must be univariate; built-in
// kernels are condition-checked, attested ones pass untouched.
LevyCharacteristics subordinate(const LevyCharacteristics& mu0,
                                std::vector<JumpDensity> rhos, std::vector<Kernel> kappas,
                                SubordinationOptions opt = {});

} // namespace minid
