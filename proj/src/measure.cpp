#include "minid/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "minid/quadrature.hpp"

namespace minid {

// --- LineMeasure ------------------------------------------------------------

double LineMeasure::density(double) const {
  throw std::logic_error("line measure has no density");
}

const std::vector<Atom1>& LineMeasure::atoms() const {
  throw std::logic_error("line measure is not atomic");
}

double LineMeasure::inv_cum(double y) const {
  if (!(y > 0)) throw std::invalid_argument("inv_cum: y must be > 0");
  if (y > total()) return kInf;
  // Bracket the level set, then bisect; cum is non-decreasing.
  double lo = support_lo(), hi;
  if (lo == -kInf) {
    lo = -1;
    while (cum(lo) >= y) lo *= 2; // terminates: cum vanishes at -inf
    hi = std::max(1.0, -lo);
  } else {
    if (cum(lo) >= y) return lo; // mass at the left endpoint
    hi = std::fabs(lo) + 1;
  }
  while (cum(hi) < y) {
    lo = hi;
    hi = 2 * std::fabs(hi) + 1;
    if (hi > 1e290) return kInf; // mass y is only reached in the limit
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cum(mid) >= y) hi = mid;
    else lo = mid;
  }
  return hi;
}

Atomic1D::Atomic1D(std::vector<Atom1> atoms) : atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom1& a, const Atom1& b) { return a.loc < b.loc; });
  cumw_.reserve(atoms_.size());
  locs_.reserve(atoms_.size());
  for (const auto& a : atoms_) {
    if (!(a.w >= 0) || !valid_coord(a.loc) || a.loc == kInf)
      throw std::invalid_argument("atom weights must be >= 0 with finite locations");
    total_ += a.w;
    cumw_.push_back(total_);
    locs_.push_back(a.loc);
  }
}

double Atomic1D::cum(double t) const {
  auto it = std::upper_bound(locs_.begin(), locs_.end(), t);
  return it == locs_.begin() ? 0.0 : cumw_[static_cast<std::size_t>(it - locs_.begin()) - 1];
}

double Atomic1D::support_lo() const { return atoms_.empty() ? kInf : atoms_.front().loc; }

double Atomic1D::support_hi() const { return atoms_.empty() ? -kInf : atoms_.back().loc; }

double Atomic1D::inv_cum(double y) const {
  if (!(y > 0)) throw std::invalid_argument("inv_cum: y must be > 0");
  if (y > total_) return kInf;
  auto it = std::lower_bound(cumw_.begin(), cumw_.end(), y);
  return atoms_[static_cast<std::size_t>(it - cumw_.begin())].loc;
}

double ClosedFormLine::density(double t) const {
  if (!dens_) throw std::logic_error("line measure has no density");
  return dens_(t);
}

double ClosedFormLine::inv_cum(double y) const {
  if (inv_) {
    if (!(y > 0)) throw std::invalid_argument("inv_cum: y must be > 0");
    if (y > total_) return kInf;
    return inv_(y);
  }
  return LineMeasure::inv_cum(y);
}

QuadLine::QuadLine(std::function<double(double)> dens_fn, double lo, double hi)
    : dens_(std::move(dens_fn)), lo_(lo), hi_(hi) {
  if (!(lo_ > -kInf)) throw std::invalid_argument("QuadLine needs a finite support infimum");
  if (hi_ == kInf) {
    // A divergent tail shows up as non-convergence; the measure then has
    // infinite total mass (e.g. unbounded smoothed hazards).
    auto q = integrate_semi([this](double t) { return dens_(t); }, lo_, 1e-9, 1e-13, 600);
    total_ = q.converged ? q.value : kInf;
  } else {
    total_ = integrate([this](double t) { return dens_(t); }, lo_, hi_, 1e-9).value;
  }
}

double QuadLine::cum(double t) const {
  if (t <= lo_) return 0;
  if (t >= hi_) return total_;
  return integrate([this](double s) { return dens_(s); }, lo_, t, 1e-9).value;
}

double QuadLine::density(double t) const {
  if (t < lo_ || t > hi_) return 0;
  return dens_(t);
}

ScaledLine::ScaledLine(double c, LinePtr base) : c_(c), base_(std::move(base)) {
  if (!(c_ > 0)) throw std::invalid_argument("ScaledLine factor must be > 0");
}

LinePtr make_exponential_hazard_line(double rate, double lo) {
  if (!(rate > 0)) throw std::invalid_argument("rate must be > 0");
  return std::make_shared<ClosedFormLine>(
      [rate, lo](double t) { return t <= lo ? 0.0 : -std::expm1(-rate * (t - lo)); },
      [rate, lo](double t) { return t <= lo ? 0.0 : rate * std::exp(-rate * (t - lo)); },
      1.0, lo,
      [rate, lo](double y) { return y >= 1 ? kInf : lo - std::log1p(-y) / rate; });
}

LinePtr make_lebesgue_line(double rate, double lo, double hi) {
  if (!(rate > 0) || !(hi > lo)) throw std::invalid_argument("bad lebesgue line parameters");
  double total = (hi == kInf) ? kInf : rate * (hi - lo);
  return std::make_shared<ClosedFormLine>(
      [rate, lo, hi](double t) { return rate * std::max(0.0, std::min(t, hi) - lo); },
      [rate, lo, hi](double t) { return (t > lo && t < hi) ? rate : 0.0; }, total, lo,
      [rate, lo](double y) { return lo + y / rate; }, hi);
}

LinePtr make_weibull_hazard_line(double shape, double scale) {
  if (!(shape > 0) || !(scale > 0)) throw std::invalid_argument("bad weibull parameters");
  return std::make_shared<ClosedFormLine>(
      [shape, scale](double t) { return t <= 0 ? 0.0 : std::pow(t / scale, shape); },
      [shape, scale](double t) {
        return t <= 0 ? 0.0 : shape / scale * std::pow(t / scale, shape - 1);
      },
      kInf, 0.0, [shape, scale](double y) { return scale * std::pow(y, 1.0 / shape); });
}

// --- ExponentMeasure defaults ------------------------------------------------

double ExponentMeasure::survival(const Point& x) const {
  check_point(x, dim());
  return std::exp(-orthant_mass(x));
}

double ExponentMeasure::log_density(const Point&) const {
  throw std::logic_error("measure has no density");
}

double ExponentMeasure::minid_log_density(const Point&) const {
  throw std::logic_error("measure has no min-id density");
}

Point ExponentMeasure::sample_minid(Rng&, SourceIds*) const {
  throw std::logic_error("measure has no sampler");
}

namespace {

Point embed_keep(const Point& sub, const std::vector<int>& keep, int d) {
  Point full(d, kInf);
  for (std::size_t k = 0; k < keep.size(); ++k) full[keep[k]] = sub[k];
  return full;
}

void validate_keep(const std::vector<int>& keep, int d) {
  if (keep.empty()) throw std::invalid_argument("marginalize: empty index set");
  std::vector<bool> used(d, false);
  for (int i : keep) {
    if (i < 0 || i >= d || used[i]) throw std::invalid_argument("marginalize: bad index set");
    used[i] = true;
  }
}

// Exact for orthant masses by the projection identity; density capabilities
// are dropped.
class ProjectedMeasure : public ExponentMeasure {
 public:
  ProjectedMeasure(MeasurePtr parent, std::vector<int> keep)
      : parent_(std::move(parent)), keep_(std::move(keep)) {}

  int dim() const override { return static_cast<int>(keep_.size()); }
  double orthant_mass(const Point& x) const override {
    return parent_->orthant_mass(embed_keep(x, keep_, parent_->dim()));
  }
  double lower_orthant_mass(const Point& x) const override {
    return parent_->lower_orthant_mass(embed_keep(x, keep_, parent_->dim()));
  }
  double total_mass() const override {
    // Monotone exhaustion of the finite part along the kept coordinates.
    Point big(keep_.size(), 1e300);
    return orthant_mass(big);
  }
  Support support_tag() const override { return Support::custom; }
  bool can_sample() const override { return parent_->can_sample(); }
  Point sample_minid(Rng& rng, SourceIds* src) const override {
    SourceIds inner;
    Point full = parent_->sample_minid(rng, src ? &inner : nullptr);
    Point out(keep_.size());
    if (src) src->assign(keep_.size(), -1);
    for (std::size_t k = 0; k < keep_.size(); ++k) {
      out[k] = full[keep_[k]];
      if (src && out[k] != kInf) (*src)[k] = inner[keep_[k]];
    }
    return out;
  }

 private:
  MeasurePtr parent_;
  std::vector<int> keep_;
};

} // namespace

MeasurePtr ExponentMeasure::marginalize(const std::vector<int>& keep) const {
  validate_keep(keep, dim());
  return std::make_shared<ProjectedMeasure>(shared_from_this(), keep);
}

MeasurePtr project(MeasurePtr m, const std::vector<int>& keep) {
  validate_keep(keep, m->dim());
  return std::make_shared<ProjectedMeasure>(std::move(m), keep);
}

// --- AtomicMeasure -----------------------------------------------------------

AtomicMeasure::AtomicMeasure(int d, std::vector<WeightedAtom> atoms)
    : d_(d), atoms_(std::move(atoms)) {
  if (d_ < 1) throw std::invalid_argument("dimension must be >= 1");
  for (const auto& a : atoms_) {
    if (!(a.w >= 0)) throw std::invalid_argument("atom weight must be >= 0");
    if (static_cast<int>(a.loc.size()) != d_)
      throw std::invalid_argument("atom location dimension mismatch");
    bool all_inf = true;
    for (double v : a.loc) {
      if (!valid_coord(v)) throw std::invalid_argument("atom coordinates must lie in (-inf, inf]");
      all_inf = all_inf && v == kInf;
    }
    if (all_inf) throw std::invalid_argument("atoms must lie in E'_d (not the point inf)");
    total_ += a.w;
  }
}

double AtomicMeasure::orthant_mass(const Point& x) const {
  double acc = 0;
  for (const auto& a : atoms_) {
    for (int i = 0; i < d_; ++i) {
      if (x[i] != kInf && a.loc[i] <= x[i]) {
        acc += a.w;
        break;
      }
    }
  }
  return acc;
}

double AtomicMeasure::lower_orthant_mass(const Point& x) const {
  double acc = 0;
  for (const auto& a : atoms_) {
    bool inside = true;
    for (int i = 0; i < d_; ++i) {
      if (a.loc[i] > x[i]) { // covers loc inf vs finite x
        inside = false;
        break;
      }
    }
    if (inside) acc += a.w;
  }
  return acc;
}

Point AtomicMeasure::sample_minid(Rng& rng, SourceIds* src) const {
  Point out(d_, kInf);
  if (src) src->assign(d_, -1);
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    // Multiplicity beyond one puts Poisson points at the same location and
    // cannot change the minimum, so only the hit/no-hit outcome matters.
    if (atoms_[k].w == 0) continue;
    double p_hit = -std::expm1(-atoms_[k].w);
    if (rng.uniform() >= p_hit) continue;
    for (int i = 0; i < d_; ++i) {
      if (atoms_[k].loc[i] < out[i]) {
        out[i] = atoms_[k].loc[i];
        if (src) (*src)[i] = static_cast<std::int64_t>(k);
      }
    }
  }
  return out;
}

MeasurePtr AtomicMeasure::marginalize(const std::vector<int>& keep) const {
  validate_keep(keep, d_);
  std::vector<WeightedAtom> sub;
  for (const auto& a : atoms_) {
    WeightedAtom p{a.w, Point(keep.size())};
    bool all_inf = true;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      p.loc[k] = a.loc[keep[k]];
      all_inf = all_inf && p.loc[k] == kInf;
    }
    if (!all_inf) sub.push_back(std::move(p));
  }
  return std::make_shared<AtomicMeasure>(static_cast<int>(keep.size()), std::move(sub));
}

// --- LineBundleMeasure --------------------------------------------------------

LineBundleMeasure::LineBundleMeasure(int d, std::vector<LinePtr> lines)
    : d_(d), lines_(std::move(lines)) {
  if (d_ < 1) throw std::invalid_argument("dimension must be >= 1");
  if (static_cast<int>(lines_.size()) != d_)
    throw std::invalid_argument("need one line slot per coordinate");
}

double LineBundleMeasure::orthant_mass(const Point& x) const {
  double acc = 0;
  for (int i = 0; i < d_; ++i)
    if (lines_[i] && x[i] != kInf) acc += lines_[i]->cum(x[i]);
  return acc;
}

double LineBundleMeasure::lower_orthant_mass(const Point& x) const {
  // A point of line E_i has every other coordinate infinite, so it lies in
  // (-inf, x] only when x is infinite off i.
  int finite_count = 0, finite_idx = -1;
  for (int i = 0; i < d_; ++i) {
    if (x[i] != kInf) {
      ++finite_count;
      finite_idx = i;
    }
  }
  if (finite_count == 0) return total_mass();
  if (finite_count > 1) return 0;
  return lines_[finite_idx] ? lines_[finite_idx]->cum(x[finite_idx]) : 0;
}

double LineBundleMeasure::total_mass() const {
  double acc = 0;
  for (const auto& l : lines_)
    if (l) acc += l->total();
  return acc;
}

bool LineBundleMeasure::has_density() const {
  for (const auto& l : lines_)
    if (l && !l->has_density()) return false;
  return true;
}

double LineBundleMeasure::log_density(const Point& x) const {
  if (!has_density()) throw std::logic_error("measure has no density");
  int finite_count = 0, finite_idx = -1;
  for (int i = 0; i < d_; ++i) {
    if (x[i] != kInf) {
      ++finite_count;
      finite_idx = i;
    }
  }
  if (finite_count != 1 || !lines_[finite_idx]) return -kInf;
  double f = lines_[finite_idx]->density(x[finite_idx]);
  return f > 0 ? std::log(f) : -kInf;
}

bool LineBundleMeasure::has_minid_density() const { return has_density(); }

double LineBundleMeasure::minid_log_density(const Point& x) const {
  if (!has_minid_density()) throw std::logic_error("measure has no min-id density");
  // Margins are independent: each is the record minimum of its own line.
  double acc = 0;
  for (int i = 0; i < d_; ++i) {
    if (!lines_[i]) {
      if (x[i] != kInf) return -kInf;
      continue;
    }
    if (x[i] == kInf) {
      acc -= lines_[i]->total(); // may be -inf: no mass ever at inf
    } else {
      double f = lines_[i]->density(x[i]);
      if (!(f > 0)) return -kInf;
      acc += std::log(f) - lines_[i]->cum(x[i]);
    }
  }
  return acc;
}

Point LineBundleMeasure::sample_minid(Rng& rng, SourceIds* src) const {
  Point out(d_, kInf);
  if (src) src->assign(d_, -1);
  for (int i = 0; i < d_; ++i) {
    if (!lines_[i]) continue;
    double e = rng.exponential();
    if (e >= lines_[i]->total()) continue;
    out[i] = lines_[i]->inv_cum(e);
    if (src && out[i] != kInf) (*src)[i] = i;
  }
  return out;
}

MeasurePtr LineBundleMeasure::marginalize(const std::vector<int>& keep) const {
  validate_keep(keep, d_);
  std::vector<LinePtr> sub(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) sub[k] = lines_[keep[k]];
  return std::make_shared<LineBundleMeasure>(static_cast<int>(keep.size()), std::move(sub));
}

// --- DensityMeasure -----------------------------------------------------------

DensityMeasure::DensityMeasure(int d, std::vector<StratumDensity> strata)
    : d_(d), strata_(std::move(strata)) {
  if (d_ < 1 || d_ > 31) throw std::invalid_argument("density strata support d in [1,31]");
  for (std::size_t s = 0; s < strata_.size(); ++s) {
    const auto& st = strata_[s];
    if (st.coords.empty() || !st.dens) throw std::invalid_argument("stratum needs coords and density");
    std::uint32_t key = 0;
    for (int c : st.coords) {
      if (c < 0 || c >= d_) throw std::invalid_argument("stratum coordinate out of range");
      key |= (1u << c);
    }
    if (!std::is_sorted(st.coords.begin(), st.coords.end()))
      throw std::invalid_argument("stratum coords must be sorted");
    if (by_key_.count(key)) throw std::invalid_argument("duplicate stratum");
    if (st.lo.size() != st.coords.size() || st.hi.size() != st.coords.size())
      throw std::invalid_argument("stratum needs lo/hi bounds per coordinate");
    by_key_[key] = s;
    total_ += st.mass;
  }
}

const StratumDensity* DensityMeasure::find_stratum(std::uint32_t key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &strata_[it->second];
}

namespace {

double integrate_maybe_semi(const Fn1& f, double a, double b, double tol) {
  if (a >= b) return 0;
  if (b == kInf) return integrate_semi(f, a, tol).value;
  return integrate(f, a, b, tol).value;
}

// Rectangle integral of a stratum density over prod (a_i, b_i]; supports one
// or two coordinates, which is all the fallback path needs.
double rect_integral(const StratumDensity& s, const std::vector<double>& a,
                     const std::vector<double>& b) {
  const std::size_t m = s.coords.size();
  for (std::size_t i = 0; i < m; ++i)
    if (a[i] >= b[i]) return 0;
  if (m == 1) {
    return integrate_maybe_semi([&](double t) { return s.dens({t}); }, a[0], b[0], 1e-9);
  }
  if (m == 2) {
    return integrate_maybe_semi(
        [&](double t) {
          return integrate_maybe_semi([&](double u) { return s.dens({t, u}); }, a[1], b[1],
                                      1e-9);
        },
        a[0], b[0], 1e-8);
  }
  throw std::logic_error("stratum needs a closed-form orthant mass beyond two dimensions");
}

} // namespace

double DensityMeasure::stratum_complement_mass(const StratumDensity& s, const Point& x) const {
  if (s.orthant_mass_fn) return s.orthant_mass_fn(x);
  // Complement within the stratum = mass - {strictly above x on constrained coords}.
  bool constrained = false;
  std::vector<double> a(s.coords.size()), b(s.coords.size());
  for (std::size_t k = 0; k < s.coords.size(); ++k) {
    double xi = x[s.coords[k]];
    a[k] = s.lo[k];
    b[k] = s.hi[k];
    if (xi != kInf) {
      constrained = true;
      a[k] = std::max(a[k], xi);
    }
  }
  if (!constrained) return 0;
  return s.mass - rect_integral(s, a, b);
}

double DensityMeasure::stratum_lower_mass(const StratumDensity& s, const Point& x) const {
  if (s.lower_orthant_mass_fn) return s.lower_orthant_mass_fn(x);
  // Coordinates outside the stratum are infinite on the stratum's points, so
  // x must be infinite there.
  std::uint32_t key = 0;
  for (int c : s.coords) key |= (1u << c);
  for (int i = 0; i < d_; ++i)
    if (!(key & (1u << i)) && x[i] != kInf) return 0;
  std::vector<double> a(s.coords.size()), b(s.coords.size());
  for (std::size_t k = 0; k < s.coords.size(); ++k) {
    a[k] = s.lo[k];
    b[k] = std::min(s.hi[k], x[s.coords[k]]);
  }
  return rect_integral(s, a, b);
}

double DensityMeasure::orthant_mass(const Point& x) const {
  double acc = 0;
  for (const auto& s : strata_) acc += stratum_complement_mass(s, x);
  return acc;
}

double DensityMeasure::lower_orthant_mass(const Point& x) const {
  double acc = 0;
  for (const auto& s : strata_) acc += stratum_lower_mass(s, x);
  return acc;
}

ExponentMeasure::Support DensityMeasure::support_tag() const {
  if (strata_.size() == 1 && static_cast<int>(strata_[0].coords.size()) == d_)
    return Support::full;
  return Support::custom;
}

double DensityMeasure::log_density(const Point& x) const {
  std::uint32_t key = 0;
  std::vector<double> v;
  for (int i = 0; i < d_; ++i) {
    if (x[i] != kInf) {
      key |= (1u << i);
      v.push_back(x[i]);
    }
  }
  if (key == 0) return -kInf;
  const StratumDensity* s = find_stratum(key);
  if (!s) return -kInf;
  double f = s->dens(v);
  return f > 0 ? std::log(f) : -kInf;
}

double DensityMeasure::minid_log_density(const Point& x) const {
  if (d_ == 1) {
    if (x[0] == kInf) return total_ == kInf ? -kInf : -total_;
    double ld = log_density(x);
    return ld == -kInf ? -kInf : ld - orthant_mass(x);
  }
  if (d_ != 2) throw std::logic_error("min-id density of strata measures needs d <= 2");
  // d = 2: on the all-finite stratum f = exp(-m) (dm/dx1 dm/dx2 + stratum
  // density), the mixed second derivative of S(x) = exp(-m(x)).  A point with
  // exactly one infinite coordinate j needs every measure point finite in j
  // absent, so only the opposite axis stratum contributes the hit factor and
  // the exponent adds the full mass of the strata touching j.  The point
  // (inf, inf) carries exp(-total).
  auto dm = [&](int i, const Point& p) {
    // d m / d x_i at p: density of {y_i <= x_i, y_j > x_j}, which collects
    // the joint stratum integrated above x_j plus the single-coordinate line.
    int j = 1 - i;
    double acc = 0;
    const StratumDensity* joint = find_stratum(3u);
    if (joint) {
      double lo_j = joint->lo[j], hi_j = joint->hi[j];
      double a = (p[j] == kInf) ? lo_j : std::max(lo_j, p[j]);
      if (a < hi_j) {
        auto f = [&](double u) {
          return joint->dens(i == 0 ? std::vector<double>{p[0], u}
                                    : std::vector<double>{u, p[1]});
        };
        acc += (hi_j == kInf) ? integrate_semi(f, a, 1e-9).value
                              : integrate(f, a, hi_j, 1e-9).value;
      }
    }
    const StratumDensity* line = find_stratum(1u << i);
    if (line) acc += line->dens({p[i]});
    return acc;
  };
  if (x[0] == kInf && x[1] == kInf) return total_ == kInf ? -kInf : -total_;
  double m = orthant_mass(x);
  if (x[0] != kInf && x[1] != kInf) {
    const StratumDensity* joint = find_stratum(3u);
    double fj = joint ? joint->dens({x[0], x[1]}) : 0.0;
    double val = dm(0, x) * dm(1, x) + fj;
    return val > 0 ? std::log(val) - m : -kInf;
  }
  int i = (x[0] != kInf) ? 0 : 1;
  const StratumDensity* axis = find_stratum(1u << i);
  if (!axis) return -kInf;
  double f = axis->dens({x[i]});
  if (!(f > 0)) return -kInf;
  // Exponent: strata with a finite coordinate off axis i must yield no point
  // at all; the axis stratum only forbids points at or below x_i.
  double forbidden = stratum_complement_mass(*axis, x);
  for (const auto& s : strata_)
    if (&s != axis) forbidden += s.mass;
  if (forbidden == kInf) return -kInf;
  return std::log(f) - forbidden;
}

bool DensityMeasure::can_sample() const {
  for (const auto& s : strata_)
    if (!(s.mass < kInf) || !s.sampler) return false;
  return true;
}

Point DensityMeasure::sample_minid(Rng& rng, SourceIds* src) const {
  if (!can_sample()) throw std::logic_error("strata lack samplers or have infinite mass");
  Point out(d_, kInf);
  if (src) src->assign(d_, -1);
  std::int64_t id = 0;
  for (const auto& s : strata_) {
    long n = rng.poisson(s.mass);
    for (long k = 0; k < n; ++k) {
      std::vector<double> v = s.sampler(rng);
      ++id;
      for (std::size_t c = 0; c < s.coords.size(); ++c) {
        if (v[c] < out[s.coords[c]]) {
          out[s.coords[c]] = v[c];
          if (src) (*src)[s.coords[c]] = id;
        }
      }
    }
  }
  return out;
}

// --- SumMeasure ---------------------------------------------------------------

SumMeasure::SumMeasure(int d, std::vector<MeasurePtr> parts) : d_(d), parts_(std::move(parts)) {
  for (const auto& p : parts_)
    if (!p || p->dim() != d_) throw std::invalid_argument("sum parts must share the dimension");
}

double SumMeasure::orthant_mass(const Point& x) const {
  double acc = 0;
  for (const auto& p : parts_) acc += p->orthant_mass(x);
  return acc;
}

double SumMeasure::lower_orthant_mass(const Point& x) const {
  double acc = 0;
  for (const auto& p : parts_) acc += p->lower_orthant_mass(x);
  return acc;
}

double SumMeasure::total_mass() const {
  double acc = 0;
  for (const auto& p : parts_) acc += p->total_mass();
  return acc;
}

bool SumMeasure::can_sample() const {
  for (const auto& p : parts_)
    if (!p->can_sample()) return false;
  return true;
}

Point SumMeasure::sample_minid(Rng& rng, SourceIds* src) const {
  Point out(d_, kInf);
  if (src) src->assign(d_, -1);
  SourceIds inner;
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    Point draw = parts_[k]->sample_minid(rng, src ? &inner : nullptr);
    for (int i = 0; i < d_; ++i) {
      if (draw[i] < out[i]) {
        out[i] = draw[i];
        if (src) (*src)[i] = (static_cast<std::int64_t>(k) << 24) + inner[i];
      }
    }
  }
  return out;
}

MeasurePtr zero_measure(int d) { return std::make_shared<AtomicMeasure>(d, std::vector<WeightedAtom>{}); }

bool is_zero(const ExponentMeasure& m) { return m.total_mass() == 0; }

} // namespace minid
