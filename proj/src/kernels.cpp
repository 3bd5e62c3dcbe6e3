#include "minid/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "minid/quadrature.hpp"

namespace minid {

Kernel make_dykstra_laud_kernel(double tau) {
  if (!(tau > 0)) throw std::invalid_argument("kernel scale must be > 0");
  Kernel k;
  k.name = "dykstra_laud";
  k.eval = [tau](double s, double y) { return s >= y ? tau : 0.0; };
  k.primitive = [tau](double x, double y) {
    double lo = std::max(y, 0.0);
    return x > lo ? tau * (x - lo) : 0.0;
  };
  k.bound = tau;
  k.act_delta = 1.0;
  k.act_floor = tau / 2;
  k.cutoff = [](double t) { return t; };
  k.total = [](double) { return kInf; };
  k.start = [](double y) { return std::max(y, 0.0); };
  return k;
}

Kernel make_rectangular_kernel(double a, double tau) {
  if (!(a > 0) || !(tau > 0)) throw std::invalid_argument("kernel scales must be > 0");
  Kernel k;
  k.name = "rectangular";
  k.eval = [a, tau](double s, double y) { return std::fabs(s - y) <= tau ? a : 0.0; };
  k.primitive = [a, tau](double x, double y) {
    double lo = std::max(y - tau, 0.0);
    double hi = std::min(x, y + tau);
    return hi > lo ? a * (hi - lo) : 0.0;
  };
  k.bound = a;
  k.act_delta = tau;
  k.act_floor = a / 2;
  k.cutoff = [tau](double t) { return t + tau; };
  k.total = [a, tau](double y) { return a * (y + tau - std::max(y - tau, 0.0)); };
  k.start = [tau](double y) { return std::max(y - tau, 0.0); };
  return k;
}

Kernel make_ou_kernel(double tau) {
  if (!(tau > 0)) throw std::invalid_argument("kernel scale must be > 0");
  const double c = std::sqrt(2 * tau);
  Kernel k;
  k.name = "ou";
  k.eval = [c, tau](double s, double y) { return s >= y ? c * std::exp(-tau * (s - y)) : 0.0; };
  k.primitive = [c, tau](double x, double y) {
    double lo = std::max(y, 0.0);
    if (x <= lo) return 0.0;
    return c / tau * (std::exp(-tau * (lo - y)) - std::exp(-tau * (x - y)));
  };
  k.bound = c;
  k.act_delta = 1 / tau; // decay over one time constant stays above c/e
  k.act_floor = c / 3;
  k.cutoff = [](double t) { return t; };
  k.total = [c, tau](double y) { return y >= 0 ? c / tau : c / tau * std::exp(tau * y); };
  k.start = [](double y) { return std::max(y, 0.0); };
  return k;
}

void check_kernel(const Kernel& k) {
  if (k.attested) return;
  auto fail = [&](const char* what) {
    throw std::invalid_argument("kernel '" + k.name + "': " + what);
  };
  if (!k.eval || !k.primitive || !k.cutoff || !k.total || !k.start)
    fail("eval/primitive/cutoff/total/start must all be set");
  if (!(k.bound > 0) || k.bound == kInf) fail("bound must be finite and positive");
  if (!(k.act_delta > 0) || !(k.act_floor > 0)) fail("activation window must be declared");

  const std::vector<double> ys = {0.05, 0.3, 1.0, 2.7, 11.0, 47.0};
  const std::vector<double> ss = {0.01, 0.2, 0.9, 1.9, 3.3, 12.5, 60.0};
  for (double y : ys) {
    for (double s : ss) {
      double v = k.eval(s, y);
      if (!(v >= 0)) fail("takes a negative value");
      if (v > k.bound * (1 + 1e-12)) fail("exceeds its declared bound");
    }
    for (double f : {0.25, 0.5, 0.75})
      if (!(k.eval(y + f * k.act_delta, y) >= k.act_floor))
        fail("falls below the activation floor");
    double st = k.start(y);
    if (st > 0 && k.eval(0.5 * st, y) != 0) fail("is active before its declared start");
  }
  for (double t : {0.4, 1.0, 5.0, 20.0}) {
    double b = k.cutoff(t) * (1 + 1e-9) + 1e-9;
    for (double s : ss)
      if (s <= t && k.eval(s, b) != 0) fail("reaches locations beyond the cutoff");
  }
  for (double y : {0.3, 2.7}) {
    for (double x : {0.7, 4.1}) {
      double direct =
          integrate([&](double s) { return k.eval(s, y); }, 0.0, x, 1e-10, 1e-13).value;
      if (std::fabs(direct - k.primitive(x, y)) > 1e-6 * (1 + std::fabs(direct)))
        fail("primitive disagrees with its evaluation");
    }
    double tot = k.total(y);
    double far = k.primitive(1e7, y);
    if (tot == kInf) {
      if (!(far > 1e3)) fail("total claims divergence the primitive does not show");
    } else if (std::fabs(far - tot) > 1e-6 * (1 + tot)) {
      fail("total disagrees with its primitive");
    }
  }
}

LinePtr smoothed_atom_line(double a, double y, const Kernel& k) {
  if (!(a > 0)) throw std::invalid_argument("atom size must be > 0");
  auto prim = k.primitive;
  auto ev = k.eval;
  return std::make_shared<ClosedFormLine>(
      [a, y, prim](double t) { return a * prim(t, y); },
      [a, y, ev](double s) { return a * ev(s, y); }, a * k.total(y), k.start(y));
}

LinePtr as_line_1d(const MeasurePtr& m) {
  if (!m || m->dim() != 1) throw std::invalid_argument("expected a univariate measure");
  if (is_zero(*m)) return nullptr;
  if (auto a = std::dynamic_pointer_cast<const AtomicMeasure>(m)) {
    std::vector<Atom1> atoms;
    atoms.reserve(a->atoms().size());
    for (const auto& at : a->atoms()) atoms.push_back({at.w, at.loc[0]});
    return std::make_shared<Atomic1D>(std::move(atoms));
  }
  if (auto b = std::dynamic_pointer_cast<const LineBundleMeasure>(m)) return b->line(0);
  throw std::invalid_argument("univariate measure must be atomic or a line bundle");
}

LinePtr cap_line(const LinePtr& base, double B) {
  if (!base) return nullptr;
  if (base->is_atomic()) {
    std::vector<Atom1> kept;
    for (const auto& at : base->atoms())
      if (at.loc <= B) kept.push_back(at);
    if (kept.empty()) return nullptr;
    return std::make_shared<Atomic1D>(std::move(kept));
  }
  double tot = base->cum(B);
  if (!(tot > 0)) return nullptr;
  std::function<double(double)> dens;
  if (base->has_density())
    dens = [base, B](double s) { return s <= B ? base->density(s) : 0.0; };
  return std::make_shared<ClosedFormLine>(
      [base, B](double t) { return base->cum(std::min(t, B)); }, std::move(dens), tot,
      base->support_lo(), nullptr, std::min(B, base->support_hi()));
}

LinePtr kernel_smooth_line(const MeasurePtr& eta, const Kernel& k) {
  if (!eta || eta->dim() != 1)
    throw std::invalid_argument("kernel smoothing needs a univariate measure");
  LinePtr base = as_line_1d(eta);
  if (!base) return nullptr;
  if (base->is_atomic()) {
    auto atoms = std::make_shared<std::vector<Atom1>>(base->atoms());
    double tot = 0, lo = kInf;
    for (const auto& at : *atoms) {
      tot += at.w * k.total(at.loc);
      lo = std::min(lo, k.start(at.loc));
    }
    auto prim = k.primitive;
    auto ev = k.eval;
    return std::make_shared<ClosedFormLine>(
        [atoms, prim](double t) {
          double s = 0;
          for (const auto& at : *atoms) s += at.w * prim(t, at.loc);
          return s;
        },
        [atoms, ev](double s) {
          double v = 0;
          for (const auto& at : *atoms) v += at.w * ev(s, at.loc);
          return v;
        },
        tot, lo);
  }
  if (!base->has_density())
    throw std::invalid_argument("kernel smoothing needs atoms or a location density");
  const double lo0 = base->support_lo();
  const double hi0 = base->support_hi();
  if (!(lo0 > -kInf))
    throw std::invalid_argument("kernel smoothing needs a support infimum");
  auto k2 = k; // the lambdas may outlive the caller's kernel object
  auto dens = [base, k2, lo0, hi0](double s) {
    double hi = std::min(k2.cutoff(s), hi0);
    if (!(hi > lo0)) return 0.0;
    return integrate([&](double y) { return k2.eval(s, y) * base->density(y); }, lo0, hi,
                     1e-9, 1e-13, 400)
        .value;
  };
  auto cum = [base, k2, lo0, hi0](double t) {
    double hi = std::min(k2.cutoff(t), hi0);
    if (!(hi > lo0)) return 0.0;
    return integrate([&](double y) { return k2.primitive(t, y) * base->density(y); }, lo0,
                     hi, 1e-9, 1e-13, 400)
        .value;
  };
  double tot;
  if (k.total(lo0 + 1) == kInf) {
    tot = base->total() > 0 ? kInf : 0.0;
  } else if (hi0 < kInf) {
    tot = integrate([&](double y) { return k.total(y) * base->density(y); }, lo0, hi0, 1e-9,
                    1e-13, 400)
              .value;
  } else {
    auto q = integrate_semi([&](double y) { return k.total(y) * base->density(y); }, lo0,
                            1e-9, 1e-13, 400);
    tot = q.converged ? q.value : kInf;
  }
  return std::make_shared<ClosedFormLine>(std::move(cum), std::move(dens), tot,
                                          k.start(lo0));
}

double smoothed_mass_at(const LineMeasure& locations, const Kernel& k, double t) {
  if (locations.is_atomic()) {
    double s = 0;
    for (const auto& at : locations.atoms()) s += at.w * k.primitive(t, at.loc);
    return s;
  }
  if (!locations.has_density())
    throw std::invalid_argument("location measure needs atoms or a density");
  double lo = locations.support_lo();
  double hi = std::min(k.cutoff(t), locations.support_hi());
  if (!(hi > lo)) return 0.0;
  auto f = [&](double y) { return k.primitive(t, y) * locations.density(y); };
  if (hi == kInf) {
    auto q = integrate_semi(f, lo, 1e-9, 1e-13, 400);
    return q.converged ? q.value : kInf;
  }
  return integrate(f, lo, hi, 1e-9, 1e-13, 400).value;
}

double smoothed_mass_at(const ExponentMeasure& eta, const Kernel& k, double t) {
  if (eta.dim() != 1) throw std::invalid_argument("expected a univariate measure");
  if (auto atomic = dynamic_cast<const AtomicMeasure*>(&eta)) {
    double s = 0;
    for (const auto& at : atomic->atoms()) s += at.w * k.primitive(t, at.loc[0]);
    return s;
  }
  if (auto bundle = dynamic_cast<const LineBundleMeasure*>(&eta))
    return bundle->line(0) ? smoothed_mass_at(*bundle->line(0), k, t) : 0.0;
  throw std::invalid_argument("location measure must be atomic or a line bundle");
}

} // namespace minid
