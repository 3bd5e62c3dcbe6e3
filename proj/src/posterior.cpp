#include "minid/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>

#include "minid/jumps.hpp"
#include "minid/kernels.hpp"
#include "minid/line.hpp"
#include "minid/partitions.hpp"
#include "minid/quadrature.hpp"
#include "minid/special.hpp"
#include "minid/subordinate.hpp"

namespace minid {

namespace {

// Role of one coordinate of one column inside a block integral.  pinned
// fixes the min-id density at the observed value, pinned_inf puts the
// coordinate on the inf point mass, tail integrates the density over the
// upper tail (which collapses to a survival factor), free marginalizes.
enum class CellUse : char { pinned, pinned_inf, tail, free_cell };

struct ColumnSpec {
  std::vector<CellUse> use;
  Point x; // read at pinned and tail coordinates only
};

void check_block(const ObservationSet& obs, const std::vector<Cell>& block) {
  if (block.empty()) throw std::invalid_argument("block is empty");
  std::set<Cell> seen;
  for (auto [i, j] : block) {
    if (j < 0 || j >= obs.n() || i < 0 || i >= obs.d)
      throw std::invalid_argument("block cell out of range");
    if (!obs.is_observed(i, j))
      throw std::invalid_argument("block cell is unobserved");
    if (!seen.insert({i, j}).second)
      throw std::invalid_argument("block cell repeated");
  }
}

// Observed cells outside the block become tails, unobserved cells free.
std::vector<ColumnSpec> block_specs(const ObservationSet& obs,
                                    const std::vector<Cell>& block) {
  std::vector<ColumnSpec> specs(obs.columns.size());
  for (int j = 0; j < obs.n(); ++j) {
    specs[j].x = obs.columns[j];
    specs[j].use.assign(obs.d, CellUse::free_cell);
    for (int i = 0; i < obs.d; ++i)
      if (obs.is_observed(i, j)) specs[j].use[i] = CellUse::tail;
  }
  for (auto [i, j] : block) specs[j].use[i] = CellUse::pinned;
  return specs;
}

// A pure survival constraint at x (inf coordinates unconstrained), as used
// by the tilting weights.
ColumnSpec tail_spec(const Point& x) {
  ColumnSpec sp;
  sp.x = x;
  sp.use.assign(x.size(), CellUse::free_cell);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != kInf) sp.use[i] = CellUse::tail;
  return sp;
}

double log_h_one_column(const ExponentMeasure& eta, const ColumnSpec& sp) {
  const int d = static_cast<int>(sp.use.size());
  std::vector<int> pins, tails;
  for (int i = 0; i < d; ++i) {
    if (sp.use[i] == CellUse::pinned) pins.push_back(i);
    if (sp.use[i] == CellUse::tail) tails.push_back(i);
  }
  if (pins.empty()) {
    // No density is touched: the column contributes the survival factor at
    // the tail point, exact for any exponent measure.
    Point q(d, kInf);
    for (int i : tails) q[i] = sp.x[i];
    return -eta.orthant_mass(q);
  }
  if (!eta.has_minid_density())
    throw std::logic_error("component measure has no min-id density at a pinned cell");
  for (int i = 0; i < d; ++i)
    if (sp.use[i] == CellUse::free_cell)
      throw std::logic_error(
          "marginalizing a joint-density component over unobserved coordinates "
          "is unsupported");
  if (tails.size() >= 2)
    throw std::logic_error(
        "joint-density components support at most one tail coordinate per "
        "pinned column");
  Point base(d, kInf);
  for (int i : pins) base[i] = sp.x[i];
  // Tail coordinates split over the reference measure: the inf point mass
  // plus a Lebesgue integral above the observed value.
  std::vector<double> terms;
  terms.push_back(eta.minid_log_density(base));
  if (tails.size() == 1) {
    const int c = tails[0];
    auto q = integrate_semi(
        [&](double y) {
          Point pt = base;
          pt[c] = y;
          double ld = eta.minid_log_density(pt);
          return ld == -kInf ? 0.0 : std::exp(ld);
        },
        sp.x[c], 1e-9, 1e-30, 400);
    if (!q.converged)
      throw std::runtime_error("tail integral of a min-id density did not stabilize");
    if (q.value > 0) terms.push_back(std::log(q.value));
  }
  return logsumexp(terms);
}

// log of h(eta) = prod over columns of the pinned/tail/free pattern factor.
// Line bundles factor coordinate by coordinate; anything else goes through
// the min-id density with at most one tail integral per column.
double log_h_columns(const ExponentMeasure& eta, const std::vector<ColumnSpec>& specs) {
  if (auto* lb = dynamic_cast<const LineBundleMeasure*>(&eta)) {
    double acc = 0;
    for (const auto& sp : specs) {
      for (std::size_t i = 0; i < sp.use.size(); ++i) {
        const LinePtr& ln = lb->line(static_cast<int>(i));
        switch (sp.use[i]) {
          case CellUse::pinned: {
            if (!ln) return -kInf;
            if (!ln->has_density())
              throw std::logic_error(
                  "component line has no density at a pinned cell");
            double f = ln->density(sp.x[i]);
            if (!(f > 0)) return -kInf;
            acc += std::log(f) - ln->cum(sp.x[i]);
            break;
          }
          case CellUse::pinned_inf:
            if (ln) acc -= ln->total();
            break;
          case CellUse::tail:
            if (ln) acc -= ln->cum(sp.x[i]);
            break;
          case CellUse::free_cell:
            break;
        }
        if (acc == -kInf) return -kInf;
      }
    }
    return acc;
  }
  double acc = 0;
  for (const auto& sp : specs) {
    acc += log_h_one_column(eta, sp);
    if (acc == -kInf) return -kInf;
  }
  return acc;
}

// The smoothed family (a delta_b)^{(kappa)} on one axis reduces every block
// integral to a location integral: h(eta_{a,b}) = a^p W(b) e^{-a T(b)} with
// W the product of kernel values at the pinned cells and T the accumulated
// primitive over pinned and tail cells, so integrating the jump size first
// leaves int g0(db) W(b) A(p, T(b)) with A the tilted size moment.
struct SmoothedForm {
  const SmoothedCrmFamily* fam = nullptr;
  bool dead = false; // an off-axis pinned cell forces h = 0
  int p = 0;         // pinned cells on the axis
  int q = 0;         // inf-pinned cells on the axis
  std::vector<double> pin_x, tail_x;

  double log_weight(double b) const {
    double lw = 0;
    for (double xc : pin_x) {
      double kv = fam->kernel().eval(xc, b);
      if (!(kv > 0)) return -kInf;
      lw += std::log(kv);
    }
    return lw;
  }
  double tilt_rate(double b) const {
    double t = 0;
    for (double xc : pin_x) t += fam->kernel().primitive(xc, b);
    for (double xc : tail_x) t += fam->kernel().primitive(xc, b);
    if (q > 0) t += q * fam->kernel().total(b);
    return t;
  }
  // Locations beyond every pin's cutoff carry zero weight.
  double window_hi(double support_hi) const {
    double hi = support_hi;
    for (double xc : pin_x) hi = std::min(hi, fam->kernel().cutoff(xc));
    return hi;
  }
};

SmoothedForm smoothed_form(const SmoothedCrmFamily& fam,
                           const std::vector<ColumnSpec>& specs) {
  SmoothedForm form;
  form.fam = &fam;
  const int ax = fam.axis();
  for (const auto& sp : specs) {
    for (std::size_t i = 0; i < sp.use.size(); ++i) {
      if (static_cast<int>(i) == ax) {
        switch (sp.use[i]) {
          case CellUse::pinned:
            ++form.p;
            form.pin_x.push_back(sp.x[i]);
            break;
          case CellUse::pinned_inf:
            ++form.q;
            break;
          case CellUse::tail:
            form.tail_x.push_back(sp.x[i]);
            break;
          case CellUse::free_cell:
            break;
        }
      } else if (sp.use[i] == CellUse::pinned) {
        // The measure charges only its axis: off-axis margins are delta_inf,
        // so a finite pin has density zero and inf pins or tails cost nothing.
        form.dead = true;
        return form;
      }
    }
  }
  if (form.p == 0)
    throw std::logic_error("smoothed block integral reached with no pinned cell");
  return form;
}

double log_tilted_size_moment(const SmoothedForm& form, double b) {
  double mom = jump_tilted_moment(form.fam->jumps(), form.p, form.tilt_rate(b));
  if (mom == kInf)
    throw std::runtime_error("size reweighting diverges for " + form.fam->describe());
  return mom > 0 ? std::log(mom) : -kInf;
}

// Shift probe for the location integral, so the quadrature runs on a
// well-scaled exponential.
double smoothed_location_shift(double lo, double hi,
                               const std::function<double(double)>& log_f) {
  double shift = -kInf;
  const int probes = 65;
  const bool fin = std::isfinite(hi);
  for (int t = 0; t < probes; ++t) {
    double b = fin ? lo + (hi - lo) * (t + 0.5) / probes : lo + (t + 0.5);
    shift = std::max(shift, log_f(b));
  }
  return shift;
}

double log_smoothed_block_integral(const SmoothedCrmFamily& fam,
                                   const std::vector<ColumnSpec>& specs) {
  SmoothedForm form = smoothed_form(fam, specs);
  if (form.dead) return -kInf;
  LinePtr line = as_line_1d(fam.locations());
  if (line->is_atomic()) {
    std::vector<double> terms;
    for (const auto& at : line->atoms()) {
      if (!(at.w > 0)) continue;
      double lw = form.log_weight(at.loc);
      if (lw == -kInf) continue;
      terms.push_back(std::log(at.w) + lw + log_tilted_size_moment(form, at.loc));
    }
    return logsumexp(terms);
  }
  const double lo = line->support_lo();
  const double hi = form.window_hi(line->support_hi());
  if (!(hi > lo)) return -kInf;
  auto log_f = [&](double b) {
    double dv = line->density(b);
    if (!(dv > 0)) return -kInf;
    double lw = form.log_weight(b);
    if (lw == -kInf) return -kInf;
    return std::log(dv) + lw + log_tilted_size_moment(form, b);
  };
  double shift = smoothed_location_shift(lo, hi, log_f);
  if (shift == -kInf) return -kInf;
  auto f = [&](double b) {
    double lv = log_f(b);
    return lv == -kInf ? 0.0 : std::exp(lv - shift);
  };
  QuadResult q = std::isfinite(hi) ? integrate(f, lo, hi, 1e-9, 1e-30, 400)
                                   : integrate_semi(f, lo, 1e-9, 1e-30, 400);
  if (!q.converged)
    throw std::runtime_error("block integral did not stabilize for " + fam.describe());
  return q.value > 0 ? shift + std::log(q.value) : -kInf;
}

// log of int h(eta) nu_fam(deta).  Tilting folds into extra pure-tail
// columns, so sequential updates reuse the same closed forms.
double log_family_block_integral(const FamilyPtr& fam, std::vector<ColumnSpec> specs) {
  if (auto* t = dynamic_cast<const TiltedFamily*>(fam.get())) {
    for (const auto& x : t->masked_columns()) specs.push_back(tail_spec(x));
    return log_family_block_integral(t->base(), std::move(specs));
  }
  if (auto* fin = dynamic_cast<const FiniteMeasureFamily*>(fam.get())) {
    std::vector<double> terms;
    for (const auto& [w, m] : fin->atoms())
      terms.push_back(std::log(w) + log_h_columns(*m, specs));
    return logsumexp(terms);
  }
  if (auto* sm = dynamic_cast<const SmoothedCrmFamily*>(fam.get()))
    return log_smoothed_block_integral(*sm, specs);
  bool conv = true;
  double v = fam->integrate(
      [&](const ExponentMeasure& eta) {
        double lh = log_h_columns(eta, specs);
        return lh == -kInf ? 0.0 : std::exp(lh);
      },
      &conv);
  if (!conv)
    throw std::runtime_error("block integral did not stabilize for " + fam->describe());
  return v > 0 ? std::log(v) : -kInf;
}

// Density factor of the base measure for one column: block cells pinned,
// remaining observed cells of the column tails, unobserved free.  The base
// charges points, not measures, so this is its own density pattern integral.
double log_base_factor(const ExponentMeasure& base, const ColumnSpec& sp) {
  const int d = static_cast<int>(sp.use.size());
  std::vector<int> pins, tails, frees;
  for (int i = 0; i < d; ++i) {
    if (sp.use[i] == CellUse::pinned) pins.push_back(i);
    if (sp.use[i] == CellUse::tail) tails.push_back(i);
    if (sp.use[i] == CellUse::free_cell) frees.push_back(i);
  }
  if (auto* lb = dynamic_cast<const LineBundleMeasure*>(&base)) {
    // An axis measure puts every point on a single finite coordinate, so two
    // pins kill the factor, tails and frees integrate to one, and a single
    // pin reads the line density.
    if (pins.size() != 1) return -kInf;
    const LinePtr& ln = lb->line(pins[0]);
    if (!ln) return -kInf;
    if (!ln->has_density())
      throw std::logic_error("base line has no density at a pinned cell");
    double f = ln->density(sp.x[pins[0]]);
    return f > 0 ? std::log(f) : -kInf;
  }
  if (!base.has_density())
    throw std::logic_error("base measure has no density");
  if (!frees.empty())
    throw std::logic_error(
        "unobserved coordinates over a joint-density base are unsupported");
  if (tails.size() >= 2)
    throw std::logic_error(
        "joint-density bases support at most one tail coordinate per column");
  Point pt(d, kInf);
  for (int i : pins) pt[i] = sp.x[i];
  std::vector<double> terms;
  terms.push_back(base.log_density(pt));
  if (tails.size() == 1) {
    const int c = tails[0];
    auto q = integrate_semi(
        [&](double y) {
          Point p2 = pt;
          p2[c] = y;
          double ld = base.log_density(p2);
          return ld == -kInf ? 0.0 : std::exp(ld);
        },
        sp.x[c], 1e-9, 1e-30, 400);
    if (!q.converged)
      throw std::runtime_error("tail integral of the base density did not stabilize");
    if (q.value > 0) terms.push_back(std::log(q.value));
  }
  return logsumexp(terms);
}

double log_k_term(const DensityModel& model, const ObservationSet& obs,
                  const std::vector<Cell>& block) {
  const MeasurePtr& base = model.chars().base;
  if (!base || is_zero(*base)) return -kInf;
  const int col = block.front().second;
  for (auto [i, j] : block)
    if (j != col) return -kInf; // one base point cannot serve two columns
  auto specs = block_specs(obs, block);
  return log_base_factor(*base, specs[col]);
}

double log_c_norm_impl(const DensityModel& model, const ObservationSet& obs,
                       const std::vector<Cell>& block) {
  auto specs = block_specs(obs, block);
  std::vector<double> terms;
  for (const auto& fam : model.chars().families) {
    double lw = log_family_block_integral(fam, specs);
    if (lw == kInf)
      throw std::runtime_error("block normalizer diverged for " + fam->describe());
    terms.push_back(lw);
  }
  terms.push_back(log_k_term(model, obs, block));
  return logsumexp(terms);
}

void check_obs(const DensityModel& model, const ObservationSet& obs) {
  if (obs.columns.empty()) throw std::invalid_argument("no observations");
  if (obs.d != model.dim())
    throw std::invalid_argument("observation dimension mismatch");
}

// Families whose realized measures are known, by construction, to carry
// min-id densities.  Exact-jump CRMs realize atomic margins and are the one
// taxon rejected outright; unknown families cannot be certified.
void require_minid_densities(const FamilyPtr& fam) {
  if (!fam) throw std::invalid_argument("null family");
  if (auto* fin = dynamic_cast<const FiniteMeasureFamily*>(fam.get())) {
    for (const auto& [w, m] : fin->atoms())
      if (!m->has_minid_density())
        throw std::invalid_argument("mixture component without a min-id density in " +
                                    fam->describe());
    return;
  }
  if (dynamic_cast<const CrmFamily*>(fam.get()))
    throw std::invalid_argument(
        "exact-jump family " + fam->describe() +
        " has no min-id density; its posterior reduces to the tie partition");
  if (dynamic_cast<const SmoothedCrmFamily*>(fam.get())) return;
  if (dynamic_cast<const SubordinatedFamily*>(fam.get())) return;
  if (auto* t = dynamic_cast<const TiltedFamily*>(fam.get())) {
    require_minid_densities(t->base());
    return;
  }
  throw std::invalid_argument("cannot verify the density condition for " +
                              fam->describe());
}

void check_scenario(const ObservationSet& obs, const HittingScenario& sc) {
  if (sc.index_set != obs.cells())
    throw std::invalid_argument("scenario cells do not match the observed cells");
  if (sc.assignment.size() != sc.index_set.size())
    throw std::invalid_argument("scenario assignment length mismatch");
  int hi = -1;
  for (std::size_t t = 0; t < sc.assignment.size(); ++t) {
    if (sc.assignment[t] < 0 || sc.assignment[t] > hi + 1)
      throw std::invalid_argument("scenario assignment is not canonical");
    hi = std::max(hi, sc.assignment[t]);
  }
  if (sc.blocks != hi + 1)
    throw std::invalid_argument("scenario block count mismatch");
}

std::vector<Cell> ordinals_to_cells(const std::vector<Cell>& cells,
                                    const std::vector<int>& ids) {
  std::vector<Cell> block;
  block.reserve(ids.size());
  for (int id : ids) block.push_back(cells[id]);
  return block;
}

// Component draw from the h-reweighted family intensity.  Tilted families
// peel down to their base with the masked columns appended as tails, so the
// closed-form samplers below see the full weight.
MeasurePtr draw_component(const FamilyPtr& fam, std::vector<ColumnSpec> specs,
                          Rng& rng) {
  if (auto* t = dynamic_cast<const TiltedFamily*>(fam.get())) {
    for (const auto& x : t->masked_columns()) specs.push_back(tail_spec(x));
    return draw_component(t->base(), std::move(specs), rng);
  }
  if (auto* fin = dynamic_cast<const FiniteMeasureFamily*>(fam.get())) {
    std::vector<double> lw;
    for (const auto& [w, m] : fin->atoms())
      lw.push_back(std::log(w) + log_h_columns(*m, specs));
    return fin->atoms()[rng.categorical_log(lw)].second;
  }
  if (auto* sm = dynamic_cast<const SmoothedCrmFamily*>(fam.get())) {
    SmoothedForm form = smoothed_form(*sm, specs);
    if (form.dead)
      throw std::logic_error("drawing a component from a family with zero h-mass");
    LinePtr line = as_line_1d(sm->locations());
    double b = 0;
    if (line->is_atomic()) {
      std::vector<double> lw;
      for (const auto& at : line->atoms())
        lw.push_back(at.w > 0 && form.log_weight(at.loc) > -kInf
                         ? std::log(at.w) + form.log_weight(at.loc) +
                               log_tilted_size_moment(form, at.loc)
                         : -kInf);
      b = line->atoms()[rng.categorical_log(lw)].loc;
    } else {
      const double lo = line->support_lo();
      const double hi = form.window_hi(line->support_hi());
      if (!std::isfinite(hi))
        throw std::runtime_error("location window is unbounded for " + sm->describe());
      auto log_f = [&](double v) {
        double dv = line->density(v);
        if (!(dv > 0)) return -kInf;
        double lwv = form.log_weight(v);
        if (lwv == -kInf) return -kInf;
        return std::log(dv) + lwv + log_tilted_size_moment(form, v);
      };
      double shift = smoothed_location_shift(lo, hi, log_f);
      if (shift == -kInf)
        throw std::runtime_error("location density vanished for " + sm->describe());
      auto dens = [&](double v) {
        double lv = log_f(v);
        return lv == -kInf ? 0.0 : std::exp(lv - shift);
      };
      auto mass_to = [&](double v) {
        auto q = integrate(dens, lo, v, 1e-9, 1e-30, 400);
        if (!q.converged)
          throw std::runtime_error("location quantile did not stabilize for " +
                                   sm->describe());
        return q.value;
      };
      const double total = mass_to(hi);
      if (!(total > 0))
        throw std::runtime_error("location density vanished for " + sm->describe());
      const double u = rng.uniform() * total;
      double a = lo, c = hi;
      for (int it = 0; it < 70; ++it) {
        double mid = 0.5 * (a + c);
        (mass_to(mid) < u ? a : c) = mid;
      }
      b = 0.5 * (a + c);
    }
    double a = jump_tilted_sample(sm->jumps(), form.p, form.tilt_rate(b), rng);
    return sm->atom_measure(a, b);
  }
  throw std::runtime_error("no h-weighted component sampler for " + fam->describe());
}

} // namespace

bool ObservationSet::is_observed(int i, int j) const {
  return observed.empty() ? true : observed[j][i] != 0;
}

std::vector<std::pair<int, int>> ObservationSet::cells() const {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < n(); ++j)
    for (int i = 0; i < d; ++i)
      if (is_observed(i, j)) out.push_back({i, j});
  return out;
}

Point ObservationSet::masked_column(int j) const {
  Point x = columns[j];
  for (int i = 0; i < d; ++i)
    if (!is_observed(i, j)) x[i] = kInf;
  return x;
}

ObservationSet make_observations(std::vector<Point> columns) {
  return make_observations(std::move(columns), {});
}

ObservationSet make_observations(std::vector<Point> columns,
                                 std::vector<std::vector<char>> observed) {
  if (columns.empty()) throw std::invalid_argument("no observation columns");
  ObservationSet obs;
  obs.d = static_cast<int>(columns[0].size());
  if (obs.d < 1) throw std::invalid_argument("empty observation column");
  for (const auto& c : columns)
    if (static_cast<int>(c.size()) != obs.d)
      throw std::invalid_argument("ragged observation columns");
  if (!observed.empty()) {
    if (observed.size() != columns.size())
      throw std::invalid_argument("observed mask length mismatch");
    for (const auto& m : observed)
      if (static_cast<int>(m.size()) != obs.d)
        throw std::invalid_argument("observed mask width mismatch");
  }
  obs.columns = std::move(columns);
  obs.observed = std::move(observed);
  int seen = 0;
  for (int j = 0; j < obs.n(); ++j)
    for (int i = 0; i < obs.d; ++i)
      if (obs.is_observed(i, j)) {
        double v = obs.columns[j][i];
        if (!std::isfinite(v))
          throw std::invalid_argument("observed entries must be finite");
        ++seen;
      }
  if (seen == 0) throw std::invalid_argument("no observed cells");
  return obs;
}

DensityModel::DensityModel(LevyCharacteristics chars) : chars_(std::move(chars)) {
  if (chars_.d < 1) throw std::invalid_argument("dimension must be positive");
  for (const auto& fam : chars_.families) {
    if (!fam || fam->dim() != chars_.d)
      throw std::invalid_argument("family dimension mismatch");
    require_minid_densities(fam);
  }
  if (chars_.base) {
    if (chars_.base->dim() != chars_.d)
      throw std::invalid_argument("base dimension mismatch");
    if (!is_zero(*chars_.base) && !chars_.base->has_density())
      throw std::invalid_argument("nontrivial base measure carries no density");
  }
}

double mixture_density_full(const DensityModel& model, const std::vector<Point>& pts) {
  if (pts.empty()) throw std::invalid_argument("no evaluation columns");
  std::vector<ColumnSpec> specs(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const Point& x = pts[j];
    if (static_cast<int>(x.size()) != model.dim())
      throw std::invalid_argument("evaluation column dimension mismatch");
    specs[j].x = x;
    specs[j].use.assign(x.size(), CellUse::pinned_inf);
    int fin = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != x[i] || x[i] == -kInf)
        throw std::invalid_argument("evaluation columns must be finite or inf");
      if (x[i] != kInf) {
        specs[j].use[i] = CellUse::pinned;
        ++fin;
      }
    }
    // At the all-inf column the mixture integrand is 1 near eta = 0 and the
    // density diverges for every infinite-activity family.
    if (fin == 0) throw std::invalid_argument("evaluation column is entirely inf");
  }
  std::vector<double> terms;
  for (const auto& fam : model.chars().families)
    terms.push_back(log_family_block_integral(fam, specs));
  return std::exp(logsumexp(terms));
}

double margin_density(const DensityModel& model, const ObservationSet& obs) {
  check_obs(model, obs);
  auto specs = block_specs(obs, obs.cells());
  std::vector<double> terms;
  for (const auto& fam : model.chars().families)
    terms.push_back(log_family_block_integral(fam, specs));
  return std::exp(logsumexp(terms));
}

double base_margin_density(const DensityModel& model, const ObservationSet& obs) {
  check_obs(model, obs);
  return std::exp(log_k_term(model, obs, obs.cells()));
}

double h_weight(const ExponentMeasure& eta, const ObservationSet& obs,
                const std::vector<Cell>& block) {
  if (eta.dim() != obs.d) throw std::invalid_argument("measure dimension mismatch");
  check_block(obs, block);
  return std::exp(log_h_columns(eta, block_specs(obs, block)));
}

double k_term(const DensityModel& model, const ObservationSet& obs,
              const std::vector<Cell>& block) {
  check_obs(model, obs);
  check_block(obs, block);
  return std::exp(log_k_term(model, obs, block));
}

double log_c_norm(const DensityModel& model, const ObservationSet& obs,
                  const std::vector<Cell>& block) {
  check_obs(model, obs);
  check_block(obs, block);
  return log_c_norm_impl(model, obs, block);
}

double c_norm(const DensityModel& model, const ObservationSet& obs,
              const std::vector<Cell>& block) {
  return std::exp(log_c_norm(model, obs, block));
}

HittingScenario make_scenario(const ObservationSet& obs, const Rgs& assignment) {
  HittingScenario sc;
  sc.index_set = obs.cells();
  sc.assignment = assignment;
  sc.blocks = assignment.empty() ? 0 : 1 + *std::max_element(assignment.begin(),
                                                             assignment.end());
  check_scenario(obs, sc);
  return sc;
}

std::vector<std::vector<Cell>> scenario_block_cells(const HittingScenario& sc) {
  std::vector<std::vector<Cell>> out(sc.blocks);
  for (std::size_t t = 0; t < sc.assignment.size(); ++t)
    out[sc.assignment[t]].push_back(sc.index_set[t]);
  return out;
}

HittingLogProb hitting_logprob(const DensityModel& model, const ObservationSet& obs,
                               const HittingScenario& sc, int enum_cap) {
  check_obs(model, obs);
  check_scenario(obs, sc);
  const auto cells = obs.cells();
  const int k = static_cast<int>(cells.size());
  std::map<std::vector<int>, double> cache;
  auto log_c = [&](std::vector<int> ids) {
    std::sort(ids.begin(), ids.end());
    auto it = cache.find(ids);
    if (it != cache.end()) return it->second;
    double v = log_c_norm_impl(model, obs, ordinals_to_cells(cells, ids));
    cache.emplace(std::move(ids), v);
    return v;
  };
  HittingLogProb out;
  out.log_unnorm = 0;
  for (const auto& b : blocks_of(sc.assignment)) out.log_unnorm += log_c(b);
  if (k <= enum_cap) {
    std::vector<double> all;
    for_each_partition(k, [&](const Rgs& r) {
      double t = 0;
      for (const auto& b : blocks_of(r)) t += log_c(b);
      all.push_back(t);
    });
    out.log_norm = out.log_unnorm - logsumexp(all);
  }
  return out;
}

HittingScenario tie_partition(const ObservationSet& obs) {
  if (obs.columns.empty()) throw std::invalid_argument("no observations");
  const auto cells = obs.cells();
  std::map<std::pair<int, double>, int> label_of;
  std::vector<int> labels;
  for (auto [i, j] : cells) {
    auto key = std::make_pair(i, obs.columns[j][i]);
    auto [it, fresh] = label_of.emplace(key, static_cast<int>(label_of.size()));
    labels.push_back(it->second);
  }
  HittingScenario sc;
  sc.index_set = cells;
  sc.assignment = canonicalize(labels);
  sc.blocks = block_count(sc.assignment);
  return sc;
}

GibbsChain::GibbsChain(const DensityModel& model, const ObservationSet& obs,
                       HittingScenario init)
    : model_(model), obs_(obs), state_(std::move(init)) {
  check_obs(model_, obs_);
  check_scenario(obs_, state_);
}

double GibbsChain::log_c(std::vector<int> cell_ids) const {
  std::sort(cell_ids.begin(), cell_ids.end());
  auto it = cache_.find(cell_ids);
  if (it != cache_.end()) return it->second;
  double v = log_c_norm_impl(model_, obs_, ordinals_to_cells(state_.index_set, cell_ids));
  cache_.emplace(std::move(cell_ids), v);
  return v;
}

void GibbsChain::resample(int cell_ordinal, Rng& rng) {
  const int k = static_cast<int>(state_.index_set.size());
  if (cell_ordinal < 0 || cell_ordinal >= k)
    throw std::invalid_argument("cell ordinal out of range");
  std::vector<std::vector<int>> rest;
  for (const auto& b : blocks_of(state_.assignment)) {
    std::vector<int> keep;
    for (int m : b)
      if (m != cell_ordinal) keep.push_back(m);
    if (!keep.empty()) rest.push_back(std::move(keep));
  }
  // Only the block the cell joins changes, so the scenario weight ratio is a
  // ratio of that block's normalizers; the fresh singleton closes the menu.
  std::vector<double> logw;
  for (const auto& b : rest) {
    std::vector<int> with = b;
    with.push_back(cell_ordinal);
    logw.push_back(log_c(std::move(with)) - log_c(b));
  }
  logw.push_back(log_c({cell_ordinal}));
  if (*std::max_element(logw.begin(), logw.end()) == -kInf) {
    std::fprintf(stderr,
                 "gibbs: every candidate block has zero mass at cell %d; "
                 "keeping the current scenario\n",
                 cell_ordinal);
    return;
  }
  const int pick = rng.categorical_log(logw);
  std::vector<int> labels(k, 0);
  for (std::size_t bi = 0; bi < rest.size(); ++bi)
    for (int m : rest[bi]) labels[m] = static_cast<int>(bi);
  labels[cell_ordinal] = pick;
  state_.assignment = canonicalize(labels);
  state_.blocks = block_count(state_.assignment);
}

void GibbsChain::sweep(Rng& rng) {
  for (int t = 0; t < static_cast<int>(state_.index_set.size()); ++t)
    resample(t, rng);
}

double GibbsChain::log_target() const {
  double acc = 0;
  for (const auto& b : blocks_of(state_.assignment)) acc += log_c(b);
  return acc;
}

HittingScenario gibbs_step(const DensityModel& model, const ObservationSet& obs,
                           const HittingScenario& cur, Cell cell, Rng& rng) {
  const auto cells = obs.cells();
  auto it = std::find(cells.begin(), cells.end(), cell);
  if (it == cells.end()) throw std::invalid_argument("cell is not observed");
  GibbsChain chain(model, obs, cur);
  chain.resample(static_cast<int>(it - cells.begin()), rng);
  return chain.state();
}

TiltedFamily::TiltedFamily(FamilyPtr base, const ObservationSet& obs)
    : base_(std::move(base)) {
  if (!base_) throw std::invalid_argument("null family");
  if (obs.columns.empty()) throw std::invalid_argument("no observations");
  if (obs.d != base_->dim())
    throw std::invalid_argument("observation dimension mismatch");
  for (int j = 0; j < obs.n(); ++j) masked_.push_back(obs.masked_column(j));
}

double TiltedFamily::weight(const ExponentMeasure& eta) const {
  double acc = 0;
  for (const auto& x : masked_) acc += eta.orthant_mass(x);
  return std::exp(-acc);
}

double TiltedFamily::total_mass() const {
  // The weight tends to one along eta -> 0, so an infinite-activity parent
  // keeps infinite mass; a finite parent integrates the weight exactly.
  if (base_->total_mass() == kInf) return kInf;
  bool conv = true;
  double v = base_->integrate([](const ExponentMeasure&) { return 1.0; }, &conv);
  (void)conv;
  return v;
}

double TiltedFamily::integrate(const MeasureFn& F, bool* converged) const {
  return base_->integrate(
      [&](const ExponentMeasure& eta) {
        double w = weight(eta);
        return w > 0 ? w * F(eta) : 0.0;
      },
      converged);
}

std::vector<MeasurePtr> TiltedFamily::sample_prm_atoms(const TruncationPolicy& pol,
                                                       Rng& rng, double* omitted) const {
  // Thinning: keep a parent atom with probability weight(eta) <= 1.  The
  // omitted-mass bound is inherited from the parent, which only overstates
  // the tilted remainder.
  std::vector<MeasurePtr> atoms = base_->sample_prm_atoms(pol, rng, omitted);
  std::vector<MeasurePtr> kept;
  for (auto& m : atoms)
    if (rng.uniform() < weight(*m)) kept.push_back(std::move(m));
  return kept;
}

LevyCharacteristics tilt(const LevyCharacteristics& chars, const ObservationSet& obs) {
  if (obs.columns.empty()) return chars;
  if (obs.d != chars.d) throw std::invalid_argument("observation dimension mismatch");
  LevyCharacteristics out;
  out.d = chars.d;
  out.base = chars.base;
  for (const auto& fam : chars.families)
    out.families.push_back(std::make_shared<TiltedFamily>(fam, obs));
  return out;
}

MeasurePtr sample_component(const DensityModel& model, const ObservationSet& obs,
                            const std::vector<Cell>& block, Rng& rng) {
  check_obs(model, obs);
  check_block(obs, block);
  auto specs = block_specs(obs, block);
  const auto& fams = model.chars().families;
  std::vector<double> lw;
  for (const auto& fam : fams) lw.push_back(log_family_block_integral(fam, specs));
  const double logk = log_k_term(model, obs, block);
  std::vector<double> all = lw;
  all.push_back(logk);
  const double logc = logsumexp(all);
  if (logc == -kInf)
    throw std::runtime_error("block has zero normalizer; no component to draw");
  // With probability K/C the block is explained by a base point and the
  // component measure is trivial.
  if (std::log(rng.uniform()) < logk - logc) return zero_measure(model.dim());
  return draw_component(fams[rng.categorical_log(lw)], std::move(specs), rng);
}

PosteriorState posterior_state(const DensityModel& model, const ObservationSet& obs,
                               Rng& rng, const PosteriorOptions& opt) {
  check_obs(model, obs);
  const MeasurePtr& base = model.chars().base;
  if (base && !is_zero(*base))
    throw std::invalid_argument(
        "joint posterior draws require a trivial base measure");
  PosteriorState st;
  st.tilted = tilt(model.chars(), obs);
  const auto cells = obs.cells();
  const int k = static_cast<int>(cells.size());
  if (k <= opt.enum_cap) {
    std::map<std::vector<int>, double> cache;
    auto log_c = [&](std::vector<int> ids) {
      std::sort(ids.begin(), ids.end());
      auto it = cache.find(ids);
      if (it != cache.end()) return it->second;
      double v = log_c_norm_impl(model, obs, ordinals_to_cells(cells, ids));
      cache.emplace(std::move(ids), v);
      return v;
    };
    std::vector<Rgs> all;
    std::vector<double> lw;
    for_each_partition(k, [&](const Rgs& r) {
      double t = 0;
      for (const auto& b : blocks_of(r)) t += log_c(b);
      all.push_back(r);
      lw.push_back(t);
    });
    st.scenario = make_scenario(obs, all[rng.categorical_log(lw)]);
  } else {
    Rgs init(k);
    for (int t = 0; t < k; ++t) init[t] = t;
    GibbsChain chain(model, obs, make_scenario(obs, init));
    for (int s = 0; s < opt.burn_in; ++s) chain.sweep(rng);
    st.scenario = chain.state();
  }
  for (const auto& b : scenario_block_cells(st.scenario))
    st.components.push_back(sample_component(model, obs, b, rng));
  return st;
}

} // namespace minid
