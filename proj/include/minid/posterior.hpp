#pragma once

// Posterior machinery under the density condition: every measure the prior
// mixes over admits a min-id density w.r.t. the reference measure
// prod(delta_inf + Leb).  That turns the conditional law of the latent
// hitting scenario into ratios of per-block mixture integrals, and the
// posterior itself into a tilted copy of the prior plus one reweighted
// component measure per block.

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "minid/levy.hpp"
#include "minid/sampling.hpp"

namespace minid {

// Observed survival data: n columns of dimension d plus an observed-cell
// mask.  Observed entries are finite; unobserved cells are never pinned and
// never constrained by block or orthant integrals.
struct ObservationSet {
  int d = 0;
  std::vector<Point> columns;
  std::vector<std::vector<char>> observed; // [j][i]; empty means all observed

  int n() const { return static_cast<int>(columns.size()); }
  bool is_observed(int i, int j) const;
  // Observed (i, j) pairs in canonical order (j outer, i inner), matching
  // HittingScenario::index_set.
  std::vector<std::pair<int, int>> cells() const;
  // Column j with unobserved coordinates replaced by inf.
  Point masked_column(int j) const;
};

ObservationSet make_observations(std::vector<Point> columns);
ObservationSet make_observations(std::vector<Point> columns,
                                 std::vector<std::vector<char>> observed);

using Cell = std::pair<int, int>;

// Gate object for the density condition.  Construction verifies structurally
// that every family produces measures with min-id densities (exact-jump CRM
// priors are rejected; their posterior is the tie-partition special case)
// and that a nontrivial base measure carries a density of its own.
class DensityModel {
 public:
  explicit DensityModel(LevyCharacteristics chars);

  const LevyCharacteristics& chars() const { return chars_; }
  int dim() const { return chars_.d; }

 private:
  LevyCharacteristics chars_;
};

// f^{(d x m)} at the given columns: the mixture integral of prod_j f_eta(x_j)
// over every family.  Columns may carry inf entries (their point masses enter
// the density); a column that is entirely inf is rejected, since the mixture
// diverges there for infinite-activity priors.
double mixture_density_full(const DensityModel& model, const std::vector<Point>& pts);

// f^{(IJ)} at the observed cells: unobserved coordinates are marginalized
// out family by family.
double margin_density(const DensityModel& model, const ObservationSet& obs);

// g^{(IJ)}: the base-measure density margin.  Zero unless all observed cells
// sit in one column (the base charges one column at a time).
double base_margin_density(const DensityModel& model, const ObservationSet& obs);

// h(eta, X, block): the block cells of the observation matrix pinned at
// their values, every other observed cell integrated over its upper tail,
// unobserved cells marginalized; the product runs over all n columns.
double h_weight(const ExponentMeasure& eta, const ObservationSet& obs,
                const std::vector<Cell>& block);

// K(X, block): the base-measure term of the block normalizer.  Vanishes
// whenever the block spans two distinct columns or the base is trivial.
double k_term(const DensityModel& model, const ObservationSet& obs,
              const std::vector<Cell>& block);

// C(X, block) = int h dnu + K, the block normalizer; log_c_norm is the
// log-domain form the scenario distribution is assembled from.
double c_norm(const DensityModel& model, const ObservationSet& obs,
              const std::vector<Cell>& block);
double log_c_norm(const DensityModel& model, const ObservationSet& obs,
                  const std::vector<Cell>& block);

// Scenario over the observed cells of obs from a canonical restricted-growth
// string; throws when the string is not canonical or the length mismatches.
HittingScenario make_scenario(const ObservationSet& obs, const Rgs& assignment);

// Block cell lists of a scenario, in label order.
std::vector<std::vector<Cell>> scenario_block_cells(const HittingScenario& sc);

struct HittingLogProb {
  double log_unnorm = 0;           // sum over blocks of log C
  std::optional<double> log_norm;  // normalized by the Bell sum when |IJ| <= cap
};

// Unnormalized log probability of a scenario, with the exact normalizer
// attached while the partition count stays enumerable.  Beyond the cap only
// the unnormalized value is exposed; no tractable normalizer is known.
HittingLogProb hitting_logprob(const DensityModel& model, const ObservationSet& obs,
                               const HittingScenario& sc, int enum_cap = 9);

// The one almost-sure scenario of an exact-jump (NTR-type) prior: cells tie
// iff they share the component index and the exact observed value.
HittingScenario tie_partition(const ObservationSet& obs);

// One Gibbs update of the block membership of `cell`: the L+1 candidate
// scenarios (each existing block of the remainder, or a fresh singleton)
// are weighted by the ratio of affected block normalizers only.
HittingScenario gibbs_step(const DensityModel& model, const ObservationSet& obs,
                           const HittingScenario& cur, Cell cell, Rng& rng);

// Scenario sampler with the block normalizers cached across updates, keyed
// by block content.  Single-threaded per chain; run one chain per thread.
class GibbsChain {
 public:
  GibbsChain(const DensityModel& model, const ObservationSet& obs, HittingScenario init);

  void resample(int cell_ordinal, Rng& rng);
  void sweep(Rng& rng); // every observed cell once, in canonical order
  const HittingScenario& state() const { return state_; }
  // Unnormalized log posterior of the current scenario.
  double log_target() const;

 private:
  double log_c(std::vector<int> cell_ids) const;

  const DensityModel& model_;
  const ObservationSet& obs_;
  HittingScenario state_;
  mutable std::map<std::vector<int>, double> cache_;
};

// Levy characteristics of the posterior IDEM component: every family
// reweighted by w(eta) = prod_j S_eta(X_j) <= 1, base unchanged.  A
// default-constructed ObservationSet returns chars untouched.
LevyCharacteristics tilt(const LevyCharacteristics& chars, const ObservationSet& obs);

// nu reweighted by the survival factors of the observations.  The weight is
// a probability-like thinning factor, so sampling is rejection against the
// parent family's truncated draw and validity is inherited.
class TiltedFamily : public AtomFamily {
 public:
  TiltedFamily(FamilyPtr base, const ObservationSet& obs);

  int dim() const override { return base_->dim(); }
  std::string describe() const override { return "tilted:" + base_->describe(); }
  double total_mass() const override;
  double integrate(const MeasureFn& F, bool* converged) const override;
  bool exponential_moment(double s) const override { return base_->exponential_moment(s); }
  std::vector<MeasurePtr> sample_prm_atoms(const TruncationPolicy& pol, Rng& rng,
                                           double* omitted) const override;

  const FamilyPtr& base() const { return base_; }
  double weight(const ExponentMeasure& eta) const;
  // Observation columns with unobserved coordinates already masked to inf;
  // the weight is exp(-sum_j eta(orthant complement at masked_columns()[j])).
  const std::vector<Point>& masked_columns() const { return masked_; }

 private:
  FamilyPtr base_;
  std::vector<Point> masked_;
};

// One draw of a block's component measure: with probability K/C the trivial
// infinite component (returned as the zero measure on E'_d), otherwise a
// measure from the h-reweighted intensity.  Families are selected by their
// h-integrals; within a family the draw is exact for finite mixtures and
// conjugate or inverse-CDF for smoothed-jump families.
MeasurePtr sample_component(const DensityModel& model, const ObservationSet& obs,
                            const std::vector<Cell>& block, Rng& rng);

struct PosteriorOptions {
  int burn_in = 1000; // Gibbs sweeps before the scenario is taken
  int thin = 10;      // sweeps between retained states, for repeated draws
  int enum_cap = 9;   // exact scenario enumeration up to this many cells
};

struct PosteriorState {
  LevyCharacteristics tilted;
  HittingScenario scenario;
  std::vector<MeasurePtr> components; // one per block; zero measure = trivial branch
};

// One joint posterior draw (scenario and components) plus the tilted
// characteristics.  Requires a trivial base; the scenario comes from exact
// enumeration when the cell count is within the cap, else from a Gibbs run.
PosteriorState posterior_state(const DensityModel& model, const ObservationSet& obs,
                               Rng& rng, const PosteriorOptions& opt = {});

} // namespace minid
