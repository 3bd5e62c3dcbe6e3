#include "minid/levy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "minid/quadrature.hpp"

namespace minid {

// --- FiniteMeasureFamily -----------------------------------------------------

FiniteMeasureFamily::FiniteMeasureFamily(int d, std::vector<std::pair<double, MeasurePtr>> atoms)
    : d_(d), atoms_(std::move(atoms)) {
  if (d_ < 1) throw std::invalid_argument("dimension must be >= 1");
  for (const auto& [w, m] : atoms_) {
    if (!(w >= 0)) throw std::invalid_argument("family weights must be >= 0");
    if (!m || m->dim() != d_) throw std::invalid_argument("family atom dimension mismatch");
    if (is_zero(*m)) throw std::invalid_argument("family atoms must be nonzero measures");
    total_ += w;
  }
}

std::string FiniteMeasureFamily::describe() const {
  return "finite:" + std::to_string(atoms_.size());
}

double FiniteMeasureFamily::integrate(const MeasureFn& F, bool* converged) const {
  if (converged) *converged = true;
  double acc = 0;
  for (const auto& [w, m] : atoms_) acc += w * F(*m);
  return acc;
}

std::optional<double> FiniteMeasureFamily::min_mass_functional(const Point& u) const {
  double acc = 0;
  for (const auto& [w, m] : atoms_) acc += w * std::min(m->orthant_mass(u), 1.0);
  return acc;
}

std::optional<double> FiniteMeasureFamily::mean_mass_functional(const Point& u) const {
  double acc = 0;
  for (const auto& [w, m] : atoms_) acc += w * m->orthant_mass(u);
  return acc;
}

std::optional<double> FiniteMeasureFamily::product_mass_functional(
    const std::vector<Point>& u, const std::vector<int>& mult) const {
  double acc = 0;
  for (const auto& [w, m] : atoms_) {
    double term = w;
    for (std::size_t k = 0; k < u.size(); ++k) {
      double om = m->orthant_mass(u[k]);
      for (int j = 0; j < mult[k]; ++j) term *= om;
    }
    acc += term;
  }
  return acc;
}

std::vector<MeasurePtr> FiniteMeasureFamily::sample_prm_atoms(const TruncationPolicy&, Rng& rng,
                                                              double* omitted) const {
  std::vector<MeasurePtr> out;
  for (const auto& [w, m] : atoms_) {
    long n = w > 0 ? rng.poisson(w) : 0;
    for (long k = 0; k < n; ++k) out.push_back(m);
  }
  if (omitted) *omitted += 0;
  return out;
}

// --- CrmFamily ----------------------------------------------------------------

CrmFamily::CrmFamily(int d, JumpDensity rho, MeasurePtr locations)
    : d_(d), rho_(std::move(rho)), locs_(std::move(locations)) {
  if (d_ < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!locs_ || locs_->dim() != d_)
    throw std::invalid_argument("location measure must match the dimension");
  if (!rho_.dens || !rho_.tail || !rho_.inv_tail || !rho_.first_moment_below)
    throw std::invalid_argument("jump density needs dens/tail/inv_tail/first_moment_below");
  g_total_ = locs_->total_mass();
}

double CrmFamily::total_mass() const {
  return rho_.total == kInf || g_total_ == kInf ? kInf : rho_.total * g_total_;
}

Point draw_location(const ExponentMeasure& g, Rng& rng) {
  if (auto atomic = dynamic_cast<const AtomicMeasure*>(&g)) {
    double total = atomic->total_mass();
    if (!(total > 0)) throw std::logic_error("location measure has no mass");
    double run = rng.uniform() * total;
    for (const auto& a : atomic->atoms()) {
      run -= a.w;
      if (run <= 0) return a.loc;
    }
    return atomic->atoms().back().loc;
  }
  if (auto bundle = dynamic_cast<const LineBundleMeasure*>(&g)) {
    const int d = bundle->dim();
    std::vector<double> totals(d, 0.0);
    double total = 0;
    for (int i = 0; i < d; ++i) {
      if (bundle->line(i)) totals[i] = bundle->line(i)->total();
      if (totals[i] == kInf) throw std::logic_error("location line has infinite mass");
      total += totals[i];
    }
    if (!(total > 0)) throw std::logic_error("location measure has no mass");
    double run = rng.uniform() * total;
    int pick = d - 1;
    for (int i = 0; i < d; ++i) {
      run -= totals[i];
      if (run <= 0) {
        pick = i;
        break;
      }
    }
    Point x(d, kInf);
    x[pick] = bundle->line(pick)->inv_cum(rng.uniform() * totals[pick]);
    return x;
  }
  throw std::invalid_argument("locations must be atomic or line-bundle measures");
}

double CrmFamily::integrate(const MeasureFn& F, bool* converged) const {
  bool ok = true;
  // Inner integral over the jump size for one fixed location.  A vanished
  // density short-circuits F: exponential-moment functionals overflow long
  // after the tail has died, and 0 * inf would poison the quadrature.
  auto size_integral = [&](const Point& b) {
    auto q = integrate_semi(
        [&](double a) {
          double dens = rho_.dens(a);
          if (dens == 0) return 0.0;
          AtomicMeasure m(d_, std::vector<WeightedAtom>{{a, b}});
          return dens * F(m);
        },
        0.0, 1e-8, 1e-12, 400);
    if (!q.converged) ok = false;
    return q.value;
  };
  double acc = 0;
  if (auto atomic = dynamic_cast<const AtomicMeasure*>(locs_.get())) {
    for (const auto& a : atomic->atoms()) acc += a.w * size_integral(a.loc);
  } else if (auto bundle = dynamic_cast<const LineBundleMeasure*>(locs_.get())) {
    for (int i = 0; i < d_; ++i) {
      const LinePtr& line = bundle->line(i);
      if (!line) continue;
      if (line->is_atomic()) {
        for (const auto& at : line->atoms()) {
          Point x(d_, kInf);
          x[i] = at.loc;
          acc += at.w * size_integral(x);
        }
      } else if (line->has_density()) {
        auto q = integrate_semi(
            [&](double t) {
              Point x(static_cast<std::size_t>(d_), kInf);
              x[i] = t;
              return line->density(t) * size_integral(x);
            },
            line->support_lo(), 1e-7, 1e-12, 200);
        if (!q.converged) ok = false;
        acc += q.value;
      } else {
        throw std::logic_error("location line needs atoms or a density to integrate");
      }
    }
  } else {
    throw std::logic_error("integration needs atomic or line-bundle locations");
  }
  if (converged) *converged = ok;
  return acc;
}

std::optional<double> CrmFamily::min_mass_functional(const Point& u) const {
  if (!rho_.min1) return std::nullopt;
  double g = locs_->orthant_mass(u);
  if (g == 0) return 0.0; // even a divergent size integral is damped to zero
  return *rho_.min1 == kInf ? kInf : g * *rho_.min1;
}

std::optional<double> CrmFamily::mean_mass_functional(const Point& u) const {
  double g = locs_->orthant_mass(u);
  if (g == 0) return 0.0;
  double m1 = rho_.first_moment_below(kInf);
  return m1 == kInf ? kInf : g * m1;
}

std::optional<double> CrmFamily::product_mass_functional(const std::vector<Point>& u,
                                                         const std::vector<int>& mult) const {
  // One atom a delta_b contributes a^q when b lies in every C_{u_k}.  The
  // intersection's G-mass comes from inclusion-exclusion over the joined
  // orthants, where infinite G totals cancel out.
  double g = 0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << u.size()); ++mask) {
    Point join(static_cast<std::size_t>(d_), -kInf);
    int bits = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (!(mask >> k & 1)) continue;
      ++bits;
      for (int i = 0; i < d_; ++i) join[i] = std::max(join[i], u[k][i]);
    }
    g += (bits % 2 ? 1.0 : -1.0) * locs_->orthant_mass(join);
  }
  if (g <= 0) return 0.0;
  int q = 0;
  for (int j : mult) q += j;
  auto mq = integrate_semi([&](double a) { return std::pow(a, q) * rho_.dens(a); }, 0.0, 1e-9,
                           1e-13, 400);
  if (!mq.converged || !(mq.value < kInf)) return kInf;
  return g * mq.value;
}

std::vector<MeasurePtr> CrmFamily::sample_prm_atoms(const TruncationPolicy& pol, Rng& rng,
                                                    double* omitted) const {
  if (!(g_total_ > 0)) {
    if (omitted) *omitted += 0;
    return {};
  }
  if (g_total_ == kInf)
    throw std::logic_error("locations with infinite mass cannot be swept");
  Point ref = pol.ref.empty() ? Point(static_cast<std::size_t>(d_), 1.0) : pol.ref;
  if (static_cast<int>(ref.size()) != d_)
    throw std::invalid_argument("truncation reference point dimension mismatch");
  const double g_ref = locs_->orthant_mass(ref);

  std::vector<MeasurePtr> out;
  double gamma = 0, bound = kInf;
  while (static_cast<long>(out.size()) < pol.n_max) {
    gamma += rng.exponential();
    double a = rho_.inv_tail(gamma / g_total_);
    if (!(a > 0)) { // finite activity exhausted
      bound = 0;
      break;
    }
    out.push_back(std::make_shared<AtomicMeasure>(
        d_, std::vector<WeightedAtom>{{a, draw_location(*locs_, rng)}}));
    bound = rho_.first_moment_below(a) * g_ref;
    if (!(bound < kInf) && g_ref > 0)
      throw std::logic_error("truncation policy cannot bound the omitted mass");
    if (bound <= pol.eps) break;
  }
  if (!(bound < kInf))
    throw std::logic_error("truncation policy cannot bound the omitted mass");
  if (omitted) *omitted += bound;
  return out;
}

// --- realization ----------------------------------------------------------------

RealizedIdem sample_idem(const LevyCharacteristics& ch, const TruncationPolicy& pol, Rng& rng) {
  if (ch.d < 1) throw std::invalid_argument("dimension must be >= 1");
  TruncationPolicy p = pol;
  if (p.ref.empty()) p.ref.assign(static_cast<std::size_t>(ch.d), 1.0);
  if (static_cast<int>(p.ref.size()) != ch.d)
    throw std::invalid_argument("truncation reference point dimension mismatch");

  RealizedIdem out;
  std::vector<MeasurePtr> parts;
  parts.push_back(ch.base ? ch.base : zero_measure(ch.d));
  out.parts.push_back(PartKind::alpha);
  out.family_of.push_back(-1);

  for (std::size_t fi = 0; fi < ch.families.size(); ++fi) {
    double om = 0;
    auto atoms = ch.families[fi]->sample_prm_atoms(p, rng, &om);
    out.omitted_bound += om;
    bool all_single = !atoms.empty();
    for (const auto& m : atoms) {
      auto a = std::dynamic_pointer_cast<const AtomicMeasure>(m);
      if (!a || a->atoms().size() != 1) {
        all_single = false;
        break;
      }
    }
    if (all_single) {
      // Collapse one-atom measures into a single part; each inner atom index
      // remains its own nu atom for scenario extraction.
      std::vector<WeightedAtom> merged;
      merged.reserve(atoms.size());
      for (const auto& m : atoms)
        merged.push_back(static_cast<const AtomicMeasure&>(*m).atoms()[0]);
      parts.push_back(std::make_shared<AtomicMeasure>(ch.d, std::move(merged)));
      out.parts.push_back(PartKind::nu_atom_list);
      out.family_of.push_back(static_cast<int>(fi));
    } else {
      for (auto& m : atoms) {
        parts.push_back(std::move(m));
        out.parts.push_back(PartKind::nu_atom);
        out.family_of.push_back(static_cast<int>(fi));
      }
    }
  }
  out.measure = std::make_shared<SumMeasure>(ch.d, std::move(parts));
  return out;
}

// --- validation ------------------------------------------------------------------

ValidationReport validate(const LevyCharacteristics& ch, int i_max) {
  if (i_max < 1) throw std::invalid_argument("localizing depth must be >= 1");
  if (ch.d < 1) throw std::invalid_argument("dimension must be >= 1");
  ValidationReport rep;

  for (const auto& fam : ch.families) {
    FamilyReport fr;
    fr.method = fam->describe();
    for (int i = 0; i < i_max; ++i) {
      Point u(static_cast<std::size_t>(ch.d), std::ldexp(1.0, i));
      double v;
      bool conv = true;
      if (auto closed = fam->min_mass_functional(u)) {
        v = *closed;
      } else {
        v = fam->integrate(
            [&](const ExponentMeasure& eta) { return std::min(eta.orthant_mass(u), 1.0); },
            &conv);
      }
      if (!conv || !(v < kInf)) fr.integrable = false;
      fr.min_functional.push_back(v);
    }
    rep.integrability_pass = rep.integrability_pass && fr.integrable;
    rep.families.push_back(std::move(fr));
  }

  const MeasurePtr base = ch.base ? ch.base : zero_measure(ch.d);
  for (int i = 0; i < ch.d; ++i) {
    SupportReport sr;
    bool divergent = false;
    for (int e = 1; e <= 6; ++e) {
      Point t(static_cast<std::size_t>(ch.d), kInf);
      t[i] = std::pow(10.0, e);
      double m = base->orthant_mass(t);
      for (const auto& fam : ch.families) {
        bool conv = true;
        double v;
        if (auto closed = fam->mean_mass_functional(t)) {
          v = *closed;
        } else {
          v = fam->integrate(
              [&](const ExponentMeasure& eta) { return eta.orthant_mass(t); }, &conv);
        }
        // The integrand is monotone nonnegative, so a quadrature that cannot
        // stabilize reads as an exploding mean measure.
        if (!conv || v == kInf) divergent = true;
        else m += v;
      }
      sr.values.push_back(divergent ? kInf : m);
    }
    sr.conclusive = divergent || sr.values.back() >= 30;
    rep.support_warning = rep.support_warning || !sr.conclusive;
    rep.support.push_back(std::move(sr));
  }
  return rep;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t f = 0; f < families.size(); ++f) {
    os << "family " << f << " (" << families[f].method << "): min-functional [";
    for (std::size_t i = 0; i < families[f].min_functional.size(); ++i)
      os << (i ? ", " : "") << families[f].min_functional[i];
    os << "] -> " << (families[f].integrable ? "integrable" : "DIVERGENT") << "\n";
  }
  for (std::size_t i = 0; i < support.size(); ++i) {
    os << "margin " << i << " support: mean mass at 1e6 = " << support[i].values.back()
       << " -> " << (support[i].conclusive ? "unbounded" : "inconclusive (warning)") << "\n";
  }
  return os.str();
}

// --- constructors ------------------------------------------------------------------

LevyCharacteristics make_crm(int d, MeasurePtr base, JumpDensity rho, MeasurePtr locations) {
  LevyCharacteristics ch;
  ch.d = d;
  ch.base = base ? std::move(base) : zero_measure(d);
  ch.families.push_back(std::make_shared<CrmFamily>(d, std::move(rho), std::move(locations)));
  return ch;
}

MeasurePtr product_line_measure(std::vector<LinePtr> margins) {
  if (margins.empty()) throw std::invalid_argument("need at least one margin");
  return std::make_shared<LineBundleMeasure>(static_cast<int>(margins.size()),
                                             std::move(margins));
}

} // namespace minid
