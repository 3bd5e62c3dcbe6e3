#pragma once

// One-dimensional measures on (-inf, inf].  These are the building blocks of
// line-supported exponent measures: everything is driven by the cumulative
// mass cum(t) of (-inf, t], with optional Lebesgue density and exact atom
// lists.  inv_cum is the left-continuous generalized inverse, which is also
// the record-process sampler: inv_cum(Exp(1)) is one min-id margin draw.

#include <functional>
#include <memory>
#include <vector>

#include "minid/extended.hpp"

namespace minid {

struct Atom1 {
  double w;
  double loc;
};

class LineMeasure {
 public:
  virtual ~LineMeasure() = default;

  virtual double cum(double t) const = 0;
  virtual double total() const = 0;
  // Infimum of the support; -inf when unbounded below.
  virtual double support_lo() const = 0;
  // Supremum of the support; +inf when unbounded above or unknown.  Quadrature
  // consumers clamp their windows with this so compactly supported densities
  // are never integrated over intervals that dwarf the support.
  virtual double support_hi() const { return kInf; }

  virtual bool has_density() const { return false; }
  virtual double density(double) const;

  // Smallest t with cum(t) >= y; +inf when y exceeds the total mass.
  virtual double inv_cum(double y) const;

  virtual bool is_atomic() const { return false; }
  virtual const std::vector<Atom1>& atoms() const;
};

using LinePtr = std::shared_ptr<const LineMeasure>;

// Finite list of weighted point masses; inv_cum returns atom locations
// exactly, which the not-tied-to-the-grid tie tests rely on.
class Atomic1D : public LineMeasure {
 public:
  explicit Atomic1D(std::vector<Atom1> atoms);

  double cum(double t) const override;
  double total() const override { return total_; }
  double support_lo() const override;
  double support_hi() const override;
  double inv_cum(double y) const override;
  bool is_atomic() const override { return true; }
  const std::vector<Atom1>& atoms() const override { return atoms_; }

 private:
  std::vector<Atom1> atoms_; // sorted by location
  std::vector<double> locs_; // locations alone, for binary search
  std::vector<double> cumw_; // running totals
  double total_ = 0;
};

// Closed-form line: caller supplies cum, density, total, and optionally the
// inverse; the inverse falls back to monotone bisection.
class ClosedFormLine : public LineMeasure {
 public:
  ClosedFormLine(std::function<double(double)> cum_fn,
                 std::function<double(double)> dens_fn, double total, double lo,
                 std::function<double(double)> inv_fn = nullptr, double hi = kInf)
      : cum_(std::move(cum_fn)), dens_(std::move(dens_fn)), inv_(std::move(inv_fn)),
        total_(total), lo_(lo), hi_(hi) {}

  double cum(double t) const override { return cum_(t); }
  double total() const override { return total_; }
  double support_lo() const override { return lo_; }
  double support_hi() const override { return hi_; }
  bool has_density() const override { return dens_ != nullptr; }
  double density(double t) const override;
  double inv_cum(double y) const override;

 private:
  std::function<double(double)> cum_;
  std::function<double(double)> dens_;
  std::function<double(double)> inv_;
  double total_;
  double lo_;
  double hi_;
};

// Density-only line; cumulative mass obtained by adaptive quadrature from the
// support infimum (which must be finite).
class QuadLine : public LineMeasure {
 public:
  QuadLine(std::function<double(double)> dens_fn, double lo, double hi = kInf);

  double cum(double t) const override;
  double total() const override { return total_; }
  double support_lo() const override { return lo_; }
  double support_hi() const override { return hi_; }
  bool has_density() const override { return true; }
  double density(double t) const override;

 private:
  std::function<double(double)> dens_;
  double lo_, hi_;
  double total_;
};

// weight * base.
class ScaledLine : public LineMeasure {
 public:
  ScaledLine(double c, LinePtr base);

  double cum(double t) const override { return c_ * base_->cum(t); }
  double total() const override { return c_ * base_->total(); }
  double support_lo() const override { return base_->support_lo(); }
  double support_hi() const override { return base_->support_hi(); }
  bool has_density() const override { return base_->has_density(); }
  double density(double t) const override { return c_ * base_->density(t); }
  double inv_cum(double y) const override { return base_->inv_cum(y / c_); }

 private:
  double c_;
  LinePtr base_;
};

// Convenience presets.
LinePtr make_exponential_hazard_line(double rate, double lo = 0.0);  // density rate*e^{-rate(t-lo)}
LinePtr make_lebesgue_line(double rate, double lo, double hi = kInf); // density rate on (lo, hi)
LinePtr make_weibull_hazard_line(double shape, double scale);         // cum (t/scale)^shape on t>0

} // namespace minid
