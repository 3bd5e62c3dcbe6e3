#pragma once

// Lévy characteristics (alpha, nu) of infinitely divisible exponent
// measures: nu is carried as a list of parametric atom families, each a
// pushforward of a parameter-space intensity into measure space.  This file
// covers validation of the integrability conditions, truncated PRM sampling
// of realizations, CRM construction, and product-line assembly.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minid/jumps.hpp"
#include "minid/measure.hpp"

namespace minid {

// Truncation control for infinite-activity families: atoms are generated in
// decreasing order of the family's size functional until the bound on the
// expected omitted orthant mass at the reference point falls below eps, or
// the count cap is hit (whichever first).  An empty ref means all-ones.
struct TruncationPolicy {
  double eps = 1e-4;
  long n_max = 1000000;
  Point ref;
};

using MeasureFn = std::function<double(const ExponentMeasure&)>;

class AtomFamily {
 public:
  virtual ~AtomFamily() = default;

  virtual int dim() const = 0;
  virtual std::string describe() const = 0;

  // Intensity mass of the parameter space; kInf for infinite activity.
  virtual double total_mass() const = 0;

  // int F(eta) nu_fam(d eta) by the family's declared method; *converged is
  // cleared when that method cannot stabilize (for the monotone functionals
  // used here, that is how divergence shows up).
  virtual double integrate(const MeasureFn& F, bool* converged = nullptr) const = 0;

  // Closed forms of int min{eta(C_u), 1} nu(d eta) and int eta(C_u) nu(d eta)
  // at the orthant-complement of u, when the family knows them; kInf flags
  // provable divergence.
  virtual std::optional<double> min_mass_functional(const Point&) const { return std::nullopt; }
  virtual std::optional<double> mean_mass_functional(const Point&) const { return std::nullopt; }

  // int prod_k eta(C_{u_k})^{m_k} nu(d eta) over orthant complements, when
  // the family knows it; kInf flags provable divergence.  Drives exact
  // cumulant assembly of hazard moments.
  virtual std::optional<double> product_mass_functional(const std::vector<Point>&,
                                                        const std::vector<int>&) const {
    return std::nullopt;
  }

  // Attests int e^{s eta(C)} nu(d eta) < inf on orthant complements of
  // finite eta-mass; Laplace queries with negative weights gate on it.
  virtual bool exponential_moment(double) const { return false; }

  // Atom measures of one truncated PRM(nu_fam) draw; *omitted accumulates
  // the bound on the expected omitted orthant mass at pol.ref.  Throws when
  // no finite bound is available under the policy.
  virtual std::vector<MeasurePtr> sample_prm_atoms(const TruncationPolicy& pol, Rng& rng,
                                                   double* omitted) const = 0;
};

using FamilyPtr = std::shared_ptr<const AtomFamily>;

// nu = sum of w_i delta_{eta_i}: the workhorse for deterministic-jump priors
// and for exhaustive-enumeration test fixtures.
class FiniteMeasureFamily : public AtomFamily {
 public:
  FiniteMeasureFamily(int d, std::vector<std::pair<double, MeasurePtr>> atoms);

  int dim() const override { return d_; }
  std::string describe() const override;
  double total_mass() const override { return total_; }
  double integrate(const MeasureFn& F, bool* converged) const override;
  std::optional<double> min_mass_functional(const Point& u) const override;
  std::optional<double> mean_mass_functional(const Point& u) const override;
  std::optional<double> product_mass_functional(const std::vector<Point>& u,
                                                const std::vector<int>& mult) const override;
  bool exponential_moment(double) const override { return true; }
  std::vector<MeasurePtr> sample_prm_atoms(const TruncationPolicy& pol, Rng& rng,
                                           double* omitted) const override;

  const std::vector<std::pair<double, MeasurePtr>>& atoms() const { return atoms_; }

 private:
  int d_;
  std::vector<std::pair<double, MeasurePtr>> atoms_;
  double total_ = 0;
};

// Product intensity rho(a) da x G(db) pushed through (a, b) -> a delta_b.
// G is a finite atomic or line-bundle measure supplying jump locations.
class CrmFamily : public AtomFamily {
 public:
  CrmFamily(int d, JumpDensity rho, MeasurePtr locations);

  int dim() const override { return d_; }
  std::string describe() const override { return "crm:" + rho_.name; }
  double total_mass() const override;
  double integrate(const MeasureFn& F, bool* converged) const override;
  std::optional<double> min_mass_functional(const Point& u) const override;
  std::optional<double> mean_mass_functional(const Point& u) const override;
  std::optional<double> product_mass_functional(const std::vector<Point>& u,
                                                const std::vector<int>& mult) const override;
  bool exponential_moment(double s) const override { return s < rho_.exp_rate; }
  std::vector<MeasurePtr> sample_prm_atoms(const TruncationPolicy& pol, Rng& rng,
                                           double* omitted) const override;

  const JumpDensity& jumps() const { return rho_; }
  const MeasurePtr& locations() const { return locs_; }

 private:
  int d_;
  JumpDensity rho_;
  MeasurePtr locs_;
  double g_total_;
};

struct LevyCharacteristics {
  int d = 1;
  MeasurePtr base; // alpha; the zero measure stands for the trivial base
  std::vector<FamilyPtr> families;
};

// Block granularity of the parts of a realized IDEM, consumed by hitting-
// scenario extraction: alpha points are fresh per column and never shared,
// nu atoms are shared across columns.
enum class PartKind {
  alpha,        // base measure: per-column Poisson points
  nu_atom,      // the whole part is a single nu atom
  nu_atom_list, // each inner atom index of the part is its own nu atom
};

// alpha + sum_j eta_j as a SumMeasure whose part index lives in the high
// bits of every source id; parts/family_of are aligned with it.
struct RealizedIdem {
  MeasurePtr measure;
  double omitted_bound = 0;
  std::vector<PartKind> parts;
  std::vector<int> family_of; // -1 for the base part
};

RealizedIdem sample_idem(const LevyCharacteristics& chars, const TruncationPolicy& pol,
                         Rng& rng);

struct FamilyReport {
  std::string method;
  std::vector<double> min_functional; // one value per localizing set
  bool integrable = true;
};

struct SupportReport {
  std::vector<double> values; // mean orthant mass at t = 10^1..10^6
  bool conclusive = false;    // true when the mean measure provably explodes
};

struct ValidationReport {
  std::vector<FamilyReport> families;
  std::vector<SupportReport> support; // per margin
  bool integrability_pass = true;
  bool support_warning = false;
  std::string summary() const;
};

// Integrability of min{eta(U_i),1} over geometrically growing localizing
// sets U_i, plus the real-valued-support check per margin.  Report-based:
// only provable divergence clears integrability_pass; an inconclusive
// support extrapolation sets the warning flag.
ValidationReport validate(const LevyCharacteristics& chars, int i_max = 6);

LevyCharacteristics make_crm(int d, MeasurePtr base, JumpDensity rho, MeasurePtr locations);

// Measure concentrated on the union of axes with margins[i] as its E_i
// trace; null entries carry no mass.  The min-id law has independent
// components with marginal hazard margins[i]((-inf, t]).
MeasurePtr product_line_measure(std::vector<LinePtr> margins);

// One point from G normalized, for atomic or line-bundle G.
Point draw_location(const ExponentMeasure& g, Rng& rng);

} // namespace minid
