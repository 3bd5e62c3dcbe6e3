#include "minid/subordinate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "minid/quadrature.hpp"

namespace minid {

namespace {

struct JumpAtom {
  double a, b;
};

// Decreasing-size sweep of PRM(rho(a) da loc(db)) with finite location mass
// g_total.  Stops once rho's first moment below the current size reaches
// eps_fmb, the activity is exhausted, or the cap hits; *fmb_cut reports the
// first moment at the stopping size (the caller owns the mass translation).
std::vector<JumpAtom> sweep_jumps(const JumpDensity& rho, double g_total,
                                  const std::function<double(Rng&)>& draw_b, double eps_fmb,
                                  long n_max, Rng& rng, double* fmb_cut) {
  std::vector<JumpAtom> out;
  double fmb = 0;
  if (g_total > 0) {
    double gamma = 0;
    fmb = kInf;
    while (static_cast<long>(out.size()) < n_max) {
      gamma += rng.exponential();
      double a = rho.inv_tail(gamma / g_total);
      if (!(a > 0)) { // finite activity exhausted
        fmb = 0;
        break;
      }
      out.push_back({a, draw_b(rng)});
      fmb = rho.first_moment_below(a);
      if (fmb <= eps_fmb) break;
    }
  }
  if (fmb_cut) *fmb_cut = fmb;
  return out;
}

// One closed-form line from a list of smoothed jumps on a single margin.
LinePtr jump_line(std::vector<JumpAtom> atoms, const Kernel& k) {
  if (atoms.empty()) return nullptr;
  auto list = std::make_shared<std::vector<JumpAtom>>(std::move(atoms));
  double tot = 0, lo = kInf;
  for (const auto& ja : *list) {
    tot += ja.a * k.total(ja.b);
    lo = std::min(lo, k.start(ja.b));
  }
  auto prim = k.primitive;
  auto ev = k.eval;
  return std::make_shared<ClosedFormLine>(
      [list, prim](double t) {
        double s = 0;
        for (const auto& ja : *list) s += ja.a * prim(t, ja.b);
        return s;
      },
      [list, ev](double s) {
        double v = 0;
        for (const auto& ja : *list) v += ja.a * ev(s, ja.b);
        return v;
      },
      tot, lo);
}

void require_jump_interface(const JumpDensity& rho) {
  if (!rho.dens || !rho.tail || !rho.inv_tail || !rho.first_moment_below)
    throw std::invalid_argument("jump density needs dens/tail/inv_tail/first_moment_below");
}

} // namespace

// --- SmoothedCrmFamily --------------------------------------------------------

SmoothedCrmFamily::SmoothedCrmFamily(int d, int axis, JumpDensity rho, MeasurePtr g0,
                                     Kernel k)
    : d_(d), axis_(axis), rho_(std::move(rho)), g0_(std::move(g0)), k_(std::move(k)) {
  if (d_ < 1 || axis_ < 0 || axis_ >= d_) throw std::invalid_argument("axis out of range");
  if (!g0_ || g0_->dim() != 1)
    throw std::invalid_argument("smoothed jumps need a univariate location measure");
  require_jump_interface(rho_);
  check_kernel(k_);
}

double SmoothedCrmFamily::total_mass() const {
  double g = g0_->total_mass();
  return rho_.total == kInf || g == kInf ? kInf : rho_.total * g;
}

MeasurePtr SmoothedCrmFamily::atom_measure(double a, double b) const {
  std::vector<LinePtr> lines(static_cast<std::size_t>(d_));
  lines[static_cast<std::size_t>(axis_)] = smoothed_atom_line(a, b, k_);
  return std::make_shared<LineBundleMeasure>(d_, std::move(lines));
}

double SmoothedCrmFamily::integrate(const MeasureFn& F, bool* converged) const {
  bool ok = true;
  auto size_integral = [&](double b) {
    auto q = integrate_semi(
        [&](double a) {
          double dens = rho_.dens(a);
          return dens == 0 ? 0.0 : dens * F(*atom_measure(a, b));
        },
        0.0, 1e-8, 1e-12, 400);
    if (!q.converged) ok = false;
    return q.value;
  };
  double acc = 0;
  LinePtr line = as_line_1d(g0_);
  if (!line) {
    // no locations, no mass
  } else if (line->is_atomic()) {
    for (const auto& at : line->atoms()) acc += at.w * size_integral(at.loc);
  } else if (line->has_density()) {
    auto f = [&](double b) { return line->density(b) * size_integral(b); };
    double hi = line->support_hi();
    auto q = hi < kInf ? minid::integrate(f, line->support_lo(), hi, 1e-7, 1e-12, 200)
                       : integrate_semi(f, line->support_lo(), 1e-7, 1e-12, 200);
    if (!q.converged) ok = false;
    acc += q.value;
  } else {
    throw std::logic_error("location line needs atoms or a density to integrate");
  }
  if (converged) *converged = ok;
  return acc;
}

std::optional<double> SmoothedCrmFamily::mean_mass_functional(const Point& u) const {
  double t = u[static_cast<std::size_t>(axis_)];
  if (t == kInf) return 0.0;
  double kg = smoothed_mass_at(*g0_, k_, t);
  if (kg == 0) return 0.0;
  double m1 = rho_.first_moment_below(kInf);
  return m1 == kInf || kg == kInf ? kInf : m1 * kg;
}

std::optional<double> SmoothedCrmFamily::product_mass_functional(
    const std::vector<Point>& u, const std::vector<int>& mult) const {
  // Only the first product moment is closed; K(t, b) couples size and
  // location for everything higher.
  if (u.size() != 1 || mult[0] != 1) return std::nullopt;
  return mean_mass_functional(u[0]);
}

std::vector<MeasurePtr> SmoothedCrmFamily::sample_prm_atoms(const TruncationPolicy& pol,
                                                            Rng& rng, double* omitted) const {
  Point ref = pol.ref.empty() ? Point(static_cast<std::size_t>(d_), 1.0) : pol.ref;
  if (static_cast<int>(ref.size()) != d_)
    throw std::invalid_argument("truncation reference point dimension mismatch");
  const double t_ref = ref[static_cast<std::size_t>(axis_)];

  LinePtr line = as_line_1d(g0_);
  if (line && line->total() == kInf) {
    // Locations beyond the cutoff are invisible below the reference point;
    // the realization is truncated to the visible window.
    line = cap_line(line, k_.cutoff(t_ref));
    if (line && line->total() == kInf)
      throw std::logic_error("locations with infinite mass cannot be swept");
  }
  if (!line) {
    if (omitted) *omitted += 0;
    return {};
  }

  double kg_ref = t_ref == kInf ? kInf : smoothed_mass_at(*line, k_, t_ref);
  if (kg_ref == kInf) throw std::logic_error("truncation policy cannot bound the omitted mass");
  double eps_fmb = kg_ref > 0 ? pol.eps / kg_ref : kInf;
  auto draw_b = [&line](Rng& r) { return line->inv_cum(r.uniform() * line->total()); };
  double fmb_cut = 0;
  auto atoms = sweep_jumps(rho_, line->total(), draw_b, eps_fmb, pol.n_max, rng, &fmb_cut);
  double bound = kg_ref > 0 ? fmb_cut * kg_ref : 0.0;
  if (!(bound < kInf)) throw std::logic_error("truncation policy cannot bound the omitted mass");
  if (omitted) *omitted += bound;

  std::vector<MeasurePtr> out;
  out.reserve(atoms.size());
  for (const auto& ja : atoms) out.push_back(atom_measure(ja.a, ja.b));
  return out;
}

// --- SubordinatedFamily ----------------------------------------------------------

SubordinatedFamily::SubordinatedFamily(int d, FamilyPtr root, std::vector<JumpDensity> rhos,
                                       std::vector<Kernel> kappas, SubordinationOptions opt)
    : d_(d), root_(std::move(root)), rhos_(std::move(rhos)), kappas_(std::move(kappas)),
      opt_(std::move(opt)) {
  if (d_ < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!root_ || root_->dim() != 1)
    throw std::invalid_argument("the root family must produce univariate measures");
  if (static_cast<int>(rhos_.size()) != d_ || static_cast<int>(kappas_.size()) != d_)
    throw std::invalid_argument("need one jump density and one kernel per margin");
  for (const auto& r : rhos_) require_jump_interface(r);
  for (const auto& k : kappas_) check_kernel(k);
  if (opt_.root_kernel) check_kernel(*opt_.root_kernel);
  if (opt_.inner_draws < 1) throw std::invalid_argument("inner draw count must be >= 1");
}

MeasurePtr SubordinatedFamily::assemble(const ExponentMeasure& eta0, Rng& rng,
                                        const Point& t_ref, double eps, long n_max,
                                        double* omitted) const {
  MeasurePtr eta0p = eta0.shared_from_this();
  LinePtr locs =
      opt_.root_kernel ? kernel_smooth_line(eta0p, *opt_.root_kernel) : as_line_1d(eta0p);
  std::vector<LinePtr> margins(static_cast<std::size_t>(d_));
  bool any = false;
  for (int i = 0; i < d_; ++i) {
    LinePtr li = cap_line(locs, kappas_[static_cast<std::size_t>(i)].cutoff(t_ref[i]));
    if (!li) continue;
    double gi = li->total();
    if (gi == kInf) throw std::logic_error("locations with infinite mass cannot be swept");
    // A dropped jump of size a adds at most a C_i t_ref[i] below the
    // reference, for each of the gi units of location mass.
    double factor = kappas_[static_cast<std::size_t>(i)].bound * t_ref[i] * gi;
    double eps_fmb = factor == 0 ? kInf : (factor < kInf ? (eps / d_) / factor : 0.0);
    auto draw_b = [&li](Rng& r) { return li->inv_cum(r.uniform() * li->total()); };
    double fmb_cut = 0;
    auto atoms =
        sweep_jumps(rhos_[static_cast<std::size_t>(i)], gi, draw_b, eps_fmb, n_max, rng, &fmb_cut);
    if (fmb_cut > 0 && !(fmb_cut * factor < kInf))
      throw std::logic_error("truncation policy cannot bound the omitted mass");
    if (omitted) *omitted += fmb_cut > 0 ? fmb_cut * factor : 0.0;
    margins[static_cast<std::size_t>(i)] =
        jump_line(std::move(atoms), kappas_[static_cast<std::size_t>(i)]);
    any = any || margins[static_cast<std::size_t>(i)] != nullptr;
  }
  if (!any) return nullptr;
  return std::make_shared<LineBundleMeasure>(d_, std::move(margins));
}

std::vector<MeasurePtr> SubordinatedFamily::sample_prm_atoms(const TruncationPolicy& pol,
                                                             Rng& rng, double* omitted) const {
  Point ref = pol.ref.empty() ? Point(static_cast<std::size_t>(d_), 1.0) : pol.ref;
  if (static_cast<int>(ref.size()) != d_)
    throw std::invalid_argument("truncation reference point dimension mismatch");

  // Root atoms beyond b0max are invisible below ref through every margin.
  double b0max = 0;
  for (int i = 0; i < d_; ++i) {
    double bi = kappas_[static_cast<std::size_t>(i)].cutoff(ref[static_cast<std::size_t>(i)]);
    b0max = std::max(b0max, opt_.root_kernel ? opt_.root_kernel->cutoff(bi) : bi);
  }
  // One unit of omitted root mass below b0max expands to at most L units of
  // expected omitted product-line mass below ref.
  double L = 0;
  for (int i = 0; i < d_; ++i) {
    double m1 = rhos_[static_cast<std::size_t>(i)].first_moment_below(kInf);
    double t = ref[static_cast<std::size_t>(i)];
    double reach =
        opt_.root_kernel
            ? opt_.root_kernel->bound * kappas_[static_cast<std::size_t>(i)].cutoff(t)
            : 1.0;
    L += m1 * kappas_[static_cast<std::size_t>(i)].bound * t * reach;
  }

  TruncationPolicy root_pol;
  root_pol.n_max = pol.n_max;
  root_pol.ref = {b0max};
  root_pol.eps = L > 0 && L < kInf ? pol.eps / (2 * L) : (L == 0 ? pol.eps : 0.0);

  double root_om = 0;
  auto roots = root_->sample_prm_atoms(root_pol, rng, &root_om);
  double total_om = root_om > 0 ? L * root_om : 0.0;
  if (!(total_om < kInf))
    throw std::logic_error("truncation policy cannot bound the omitted mass");

  std::vector<MeasurePtr> out;
  double per_atom = roots.empty() ? 0.0 : (pol.eps / 2) / static_cast<double>(roots.size());
  for (const auto& r : roots) {
    MeasurePtr m = assemble(*r, rng, ref, per_atom, pol.n_max, &total_om);
    if (m) out.push_back(std::move(m));
  }
  if (omitted) *omitted += total_om;
  return out;
}

Rng SubordinatedFamily::inner_stream(const ExponentMeasure& eta0) const {
  // Deterministic stream per root atom, keyed by coarse probes of the atom,
  // so repeated integrator calls see common random numbers.
  auto mix = [](std::uint64_t h, double x) {
    std::uint64_t b = std::bit_cast<std::uint64_t>(x);
    return (h ^ b) * 0x9e3779b97f4a7c15ull + (h << 7) + (h >> 3);
  };
  std::uint64_t h = 0x5bd1e995c0ffee11ull;
  h = mix(h, eta0.lower_orthant_mass({opt_.horizon}));
  h = mix(h, eta0.lower_orthant_mass({opt_.horizon / 3}));
  h = mix(h, eta0.total_mass());
  return Rng(h);
}

double SubordinatedFamily::integrate(const MeasureFn& F, bool* converged) const {
  Point href(static_cast<std::size_t>(d_), opt_.horizon);
  MeasurePtr zero = zero_measure(d_);
  bool ok = true;
  double v = root_->integrate(
      [&](const ExponentMeasure& eta0) {
        Rng mc = inner_stream(eta0);
        double acc = 0;
        for (int j = 0; j < opt_.inner_draws; ++j) {
          Rng rj = mc.split(static_cast<std::uint64_t>(j));
          MeasurePtr m = assemble(eta0, rj, href, opt_.inner_eps, opt_.inner_n_max, nullptr);
          acc += F(m ? *m : *zero);
        }
        return acc / opt_.inner_draws;
      },
      &ok);
  if (converged) *converged = ok;
  return v;
}

double SubordinatedFamily::smoothed_k(const ExponentMeasure& eta0, int i, double t) const {
  const Kernel& ki = kappas_[static_cast<std::size_t>(i)];
  if (!opt_.root_kernel) return smoothed_mass_at(eta0, ki, t);
  LinePtr sl = kernel_smooth_line(eta0.shared_from_this(), *opt_.root_kernel);
  return sl ? smoothed_mass_at(*sl, ki, t) : 0.0;
}

std::optional<double> SubordinatedFamily::mean_mass_functional(const Point& u) const {
  // Conditionally on a root atom the margins are independent CRMs, so the
  // mean orthant mass factorizes into first moments times smoothed reach.
  double acc = 0;
  for (int i = 0; i < d_; ++i) {
    double t = u[static_cast<std::size_t>(i)];
    if (t == kInf) continue;
    double m1 = rhos_[static_cast<std::size_t>(i)].first_moment_below(kInf);
    if (m1 == 0) continue;
    bool ok = true;
    double ri = root_->integrate(
        [&](const ExponentMeasure& eta0) { return smoothed_k(eta0, i, t); }, &ok);
    // Monotone nonnegative integrand: instability reads as divergence.
    if (!ok || ri == kInf) return kInf;
    if (ri > 0 && m1 == kInf) return kInf;
    if (m1 < kInf) acc += m1 * ri;
  }
  return acc;
}

// --- assembly ----------------------------------------------------------------------

LevyCharacteristics subordinate(const LevyCharacteristics& mu0, std::vector<JumpDensity> rhos,
                                std::vector<Kernel> kappas, SubordinationOptions opt) {
  if (mu0.d != 1) throw std::invalid_argument("the root measure must be univariate");
  const int d = static_cast<int>(rhos.size());
  if (d < 1 || static_cast<int>(kappas.size()) != d)
    throw std::invalid_argument("need one jump density and one kernel per margin");
  for (const auto& k : kappas) check_kernel(k);
  if (opt.root_kernel) check_kernel(*opt.root_kernel);

  LevyCharacteristics out;
  out.d = d;
  out.base = zero_measure(d); // the conditional CRMs carry no base measure

  if (mu0.base && !is_zero(*mu0.base)) {
    MeasurePtr locs = mu0.base;
    if (opt.root_kernel) {
      LinePtr sl = kernel_smooth_line(mu0.base, *opt.root_kernel);
      locs = sl ? std::make_shared<LineBundleMeasure>(1, std::vector<LinePtr>{sl}) : nullptr;
    }
    if (locs)
      for (int i = 0; i < d; ++i)
        out.families.push_back(std::make_shared<SmoothedCrmFamily>(
            d, i, rhos[static_cast<std::size_t>(i)], locs,
            kappas[static_cast<std::size_t>(i)]));
  }
  for (const auto& f : mu0.families)
    out.families.push_back(std::make_shared<SubordinatedFamily>(d, f, rhos, kappas, opt));
  return out;
}

} // namespace minid
