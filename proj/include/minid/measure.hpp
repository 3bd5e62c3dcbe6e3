#pragma once

// The exponent-measure abstraction.  An exponent measure eta on E_d =
// (-inf,inf]^d is finite on every lower-orthant complement
// (x,inf]^c = {y : y_i <= x_i for some i with x_i finite}, and defines the
// min-id survival function S(x) = exp(-eta((x,inf]^c)).  Capabilities beyond
// orthant_mass (density w.r.t. the reference measure prod(delta_inf + Leb),
// min-id density, exact min-id sampling) are optional per representation.
//
// Shipped representations: finite atomic lists, bundles of 1-d line measures
// (one per coordinate axis E_i, covering the product-line case), densities on
// the finite-coordinate strata E_D, and sums/wrappers produced by the
// transformation calculus.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "minid/extended.hpp"
#include "minid/line.hpp"
#include "minid/rng.hpp"

namespace minid {

class ExponentMeasure;
using MeasurePtr = std::shared_ptr<const ExponentMeasure>;

// Per-coordinate source ids of one min-id draw: coordinates produced by the
// same internal Poisson point share an id; infinite coordinates carry -1.
using SourceIds = std::vector<std::int64_t>;

// Instances are always owned by shared_ptr (the marginalize fallback and the
// transform wrappers rely on shared_from_this).
class ExponentMeasure : public std::enable_shared_from_this<ExponentMeasure> {
 public:
  virtual ~ExponentMeasure() = default;

  virtual int dim() const = 0;

  // eta((x,inf]^c).  All-infinite x returns 0 by convention (the infinite
  // bookkeeping atom at the point inf is never counted).
  virtual double orthant_mass(const Point& x) const = 0;

  // eta((-inf, x]), the lower-orthant mass; infinite coordinates of x impose
  // no constraint, but points of eta with an infinite coordinate i belong to
  // the orthant only when x_i is infinite too.
  virtual double lower_orthant_mass(const Point& x) const = 0;

  // Total mass of E'_d; may be +inf.
  virtual double total_mass() const = 0;

  enum class Support { full, lines, atoms, custom };
  virtual Support support_tag() const = 0;

  // exp(-orthant_mass(x)), the min-id survival function.
  double survival(const Point& x) const;

  // Density of eta itself w.r.t. the reference measure, in log scale.
  virtual bool has_density() const { return false; }
  virtual double log_density(const Point& x) const;

  // Density f_eta of the probability measure minid(eta), in log scale; the
  // value at a point with infinite coordinates includes those coordinates'
  // point masses.
  virtual bool has_minid_density() const { return false; }
  virtual double minid_log_density(const Point& x) const;

  // One exact draw from minid(eta).
  virtual bool can_sample() const { return false; }
  virtual Point sample_minid(Rng& rng, SourceIds* src = nullptr) const;

  // Projection onto the kept coordinates.  The default wrapper evaluates the
  // parent at points embedded with inf, which is exact for orthant masses.
  virtual MeasurePtr marginalize(const std::vector<int>& keep) const;
};

// --- finite atomic ---------------------------------------------------------

struct WeightedAtom {
  double w;
  Point loc;
};

class AtomicMeasure : public ExponentMeasure {
 public:
  AtomicMeasure(int d, std::vector<WeightedAtom> atoms);

  int dim() const override { return d_; }
  double orthant_mass(const Point& x) const override;
  double lower_orthant_mass(const Point& x) const override;
  double total_mass() const override { return total_; }
  Support support_tag() const override { return Support::atoms; }
  bool can_sample() const override { return true; }
  Point sample_minid(Rng& rng, SourceIds* src) const override;
  MeasurePtr marginalize(const std::vector<int>& keep) const override;

  const std::vector<WeightedAtom>& atoms() const { return atoms_; }

 private:
  int d_;
  std::vector<WeightedAtom> atoms_;
  double total_ = 0;
};

// --- line bundle (covers single lines and the product-line composite) ------

class LineBundleMeasure : public ExponentMeasure {
 public:
  // lines[i] may be null (no mass on axis E_i).
  LineBundleMeasure(int d, std::vector<LinePtr> lines);

  int dim() const override { return d_; }
  double orthant_mass(const Point& x) const override;
  double lower_orthant_mass(const Point& x) const override;
  double total_mass() const override;
  Support support_tag() const override { return Support::lines; }

  bool has_density() const override;
  double log_density(const Point& x) const override;
  bool has_minid_density() const override;
  double minid_log_density(const Point& x) const override;
  bool can_sample() const override { return true; }
  Point sample_minid(Rng& rng, SourceIds* src) const override;
  MeasurePtr marginalize(const std::vector<int>& keep) const override;

  const LinePtr& line(int i) const { return lines_[i]; }

 private:
  int d_;
  std::vector<LinePtr> lines_;
};

// --- densities on the finite-coordinate strata -----------------------------

// One stratum E_D carries a Lebesgue density over its finite coordinates
// (listed in increasing order in `coords`).  Sampling a stratum requires
// finite mass; orthant masses use the closed form when given and fall back to
// quadrature for |D| <= 2.
struct StratumDensity {
  std::vector<int> coords;
  std::function<double(const std::vector<double>&)> dens;
  double mass = 0; // mass of the stratum; finite required for sampling
  // Optional closed forms, both over E_d points (inf coordinates allowed):
  std::function<double(const Point&)> orthant_mass_fn;
  std::function<double(const Point&)> lower_orthant_mass_fn;
  // Optional direct sampler of one point of the normalized stratum density.
  std::function<std::vector<double>(Rng&)> sampler;
  // Lower/upper bounds of the coordinate supports, used by the quadrature
  // fallback; size matches coords.
  std::vector<double> lo, hi;
};

class DensityMeasure : public ExponentMeasure {
 public:
  DensityMeasure(int d, std::vector<StratumDensity> strata);

  int dim() const override { return d_; }
  double orthant_mass(const Point& x) const override;
  double lower_orthant_mass(const Point& x) const override;
  double total_mass() const override { return total_; }
  Support support_tag() const override;

  bool has_density() const override { return true; }
  double log_density(const Point& x) const override;
  bool has_minid_density() const override { return d_ <= 2; }
  double minid_log_density(const Point& x) const override;
  bool can_sample() const override;
  Point sample_minid(Rng& rng, SourceIds* src) const override;

 private:
  const StratumDensity* find_stratum(std::uint32_t key) const;
  double stratum_complement_mass(const StratumDensity& s, const Point& x) const;
  double stratum_lower_mass(const StratumDensity& s, const Point& x) const;

  int d_;
  std::vector<StratumDensity> strata_;
  std::map<std::uint32_t, std::size_t> by_key_; // bitmask of coords -> index
  double total_ = 0;
};

// --- sum of components (realized infinitely divisible measures) ------------

class SumMeasure : public ExponentMeasure {
 public:
  SumMeasure(int d, std::vector<MeasurePtr> parts);

  int dim() const override { return d_; }
  double orthant_mass(const Point& x) const override;
  double lower_orthant_mass(const Point& x) const override;
  double total_mass() const override;
  Support support_tag() const override { return Support::custom; }
  bool can_sample() const override;
  // Source ids are part_index * 2^24 + inner id; inner ids stay below 2^24.
  Point sample_minid(Rng& rng, SourceIds* src) const override;

  const std::vector<MeasurePtr>& parts() const { return parts_; }

 private:
  int d_;
  std::vector<MeasurePtr> parts_;
};

// Projection wrapper: exact for orthant masses and sampling, drops densities.
MeasurePtr project(MeasurePtr m, const std::vector<int>& keep);

// Zero measure on E'_d (trivial base).
MeasurePtr zero_measure(int d);

// Whether the measure is the zero measure (total mass 0).
bool is_zero(const ExponentMeasure& m);

} // namespace minid
