#include <cmath>
#include <memory>

#include "doctest.h"
#include "minid/quadrature.hpp"
#include "minid/subordinate.hpp"

using namespace minid;

namespace {

MeasurePtr atomic1(double w, double loc) {
  return std::make_shared<AtomicMeasure>(1, std::vector<WeightedAtom>{{w, {loc}}});
}

MeasurePtr lebesgue1(double rate, double lo, double hi) {
  std::vector<LinePtr> l{make_lebesgue_line(rate, lo, hi)};
  return std::make_shared<LineBundleMeasure>(1, std::move(l));
}

struct MeanSe {
  double mean, se;
};

MeanSe mean_se(const std::vector<double>& xs) {
  double m = 0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

} // namespace

TEST_CASE("kernel presets satisfy their declared conditions") {
  auto dl = make_dykstra_laud_kernel(0.7);
  auto rect = make_rectangular_kernel(1.3, 0.5);
  auto ou = make_ou_kernel(2.0);
  CHECK_NOTHROW(check_kernel(dl));
  CHECK_NOTHROW(check_kernel(rect));
  CHECK_NOTHROW(check_kernel(ou));

  // Closed primitives at spot points.
  CHECK(dl.primitive(2.0, 0.5) == doctest::Approx(0.7 * 1.5));
  CHECK(dl.primitive(0.4, 0.5) == 0.0);
  CHECK(rect.primitive(2.0, 0.4) == doctest::Approx(1.3 * 0.9));
  CHECK(ou.total(1.0) == doctest::Approx(std::sqrt(4.0) / 2.0));
  CHECK(rect.total(3.0) == doctest::Approx(1.3));
  CHECK(dl.total(1.0) == kInf);

  // Locations beyond the cutoff are invisible below the horizon.
  for (double s : {0.2, 0.9, 1.5})
    CHECK(rect.eval(s, rect.cutoff(1.5) + 1e-6) == 0.0);
  CHECK(dl.eval(1.0, dl.cutoff(1.0) + 1e-9) == 0.0);

  // A misdeclared bound is caught; attesting skips the check.
  auto broken = make_dykstra_laud_kernel(1.0);
  broken.bound = 0.4;
  CHECK_THROWS_AS(check_kernel(broken), std::invalid_argument);
  broken.attested = true;
  CHECK_NOTHROW(check_kernel(broken));
}

TEST_CASE("smoothed atom lines and kernel-smoothed measures") {
  auto dl = make_dykstra_laud_kernel(0.7);
  auto line = smoothed_atom_line(2.0, 0.5, dl);
  CHECK(line->cum(2.0) == doctest::Approx(2 * 0.7 * 1.5));
  CHECK(line->cum(0.4) == 0.0);
  CHECK(line->density(1.0) == doctest::Approx(1.4));
  CHECK(line->total() == kInf);
  CHECK(line->support_lo() == 0.5);
  CHECK(line->inv_cum(1.05) == doctest::Approx(1.25).epsilon(1e-9));

  // As a one-axis bundle this is the min-id margin with hazard 1.4(t-0.5)+.
  std::vector<LinePtr> ls{line};
  auto bundle = std::make_shared<LineBundleMeasure>(1, std::move(ls));
  CHECK(bundle->survival({2.0}) == doctest::Approx(std::exp(-2.1)));

  // Smoothing an atomic measure sums the per-atom primitives.
  auto two = std::make_shared<AtomicMeasure>(
      1, std::vector<WeightedAtom>{{0.5, {1.0}}, {1.5, {2.0}}});
  auto sm = kernel_smooth_line(two, dl);
  CHECK(sm->cum(3.0) == doctest::Approx(0.7 * (0.5 * 2.0 + 1.5 * 1.0)));
  CHECK(smoothed_mass_at(*two, dl, 3.0) == doctest::Approx(sm->cum(3.0)));

  // Smoothing a Lebesgue density: quadrature against the closed window value.
  auto rect = make_rectangular_kernel(1.3, 0.5);
  auto leb = lebesgue1(2.0, 0.0, 1.0);
  auto sml = kernel_smooth_line(leb, rect);
  CHECK(sml->density(0.2) == doctest::Approx(2.6 * 0.7).epsilon(1e-7));
  auto cum_oracle =
      integrate([&](double y) { return rect.primitive(0.7, y) * 2.0; }, 0.0, 1.0);
  REQUIRE(cum_oracle.converged);
  CHECK(sml->cum(0.7) == doctest::Approx(cum_oracle.value).epsilon(1e-6));
  CHECK(sml->cum(0.7) == doctest::Approx(1.443).epsilon(1e-6));
  CHECK(sml->total() == doctest::Approx(2.0 * integrate([&](double y) { return rect.total(y); },
                                                        0.0, 1.0)
                                                  .value)
                            .epsilon(1e-6));

  // Capping keeps mass at or below the cap only.
  auto capped = cap_line(sm, 2.5);
  CHECK(capped->total() == doctest::Approx(sm->cum(2.5)));
  CHECK(capped->cum(5.0) == doctest::Approx(sm->cum(2.5)));
  CHECK(capped->support_hi() == 2.5);
  CHECK(cap_line(sm, 0.9) == nullptr); // the smoothed mass starts at the atoms
  auto capped_atoms = cap_line(as_line_1d(two), 1.5);
  CHECK(capped_atoms->total() == doctest::Approx(0.5));
}

TEST_CASE("deterministic root: subordination reduces to independent smoothed CRMs") {
  LevyCharacteristics mu0;
  mu0.d = 1;
  mu0.base = lebesgue1(1.0, 0.0, 2.0);

  auto rho = make_gamma_jumps();
  auto dl = make_dykstra_laud_kernel(1.0);
  auto ch = subordinate(mu0, {rho, rho}, {dl, dl});
  REQUIRE(ch.d == 2);
  REQUIRE(ch.families.size() == 2);
  for (const auto& f : ch.families) CHECK(f->describe().rfind("smoothed_crm", 0) == 0);
  CHECK(is_zero(*ch.base));

  // Mean orthant mass of the axis-0 family at (1.5, inf): first moment of the
  // jumps times the smoothed reach of the locations.
  auto reach = integrate([&](double b) { return dl.primitive(1.5, b); }, 0.0, 2.0);
  REQUIRE(reach.converged);
  double m1 = rho.first_moment_below(kInf);
  auto hook = ch.families[0]->mean_mass_functional({1.5, kInf});
  REQUIRE(hook.has_value());
  CHECK(*hook == doctest::Approx(m1 * reach.value).epsilon(1e-8));
  CHECK(*hook == doctest::Approx(1.125).epsilon(1e-8));
  CHECK(*ch.families[1]->mean_mass_functional({1.5, kInf}) == 0.0);

  auto rep = validate(ch);
  CHECK(rep.integrability_pass);
  CHECK_FALSE(rep.support_warning);

  // Realized margin mass matches the mean hook.
  TruncationPolicy pol;
  pol.ref = {2.0, 2.0};
  Rng rng(411);
  const int n = 3000;
  std::vector<double> mass;
  mass.reserve(n);
  for (int r = 0; r < n; ++r) {
    Rng rr = rng.split(static_cast<std::uint64_t>(r));
    auto real = sample_idem(ch, pol, rr);
    CHECK(real.omitted_bound <= 2 * pol.eps + 1e-12);
    for (std::size_t p = 1; p < real.parts.size(); ++p)
      CHECK(real.parts[p] == PartKind::nu_atom);
    mass.push_back(real.measure->orthant_mass({1.5, kInf}));
  }
  auto ms = mean_se(mass);
  CHECK(std::fabs(ms.mean - *hook) <= 3 * ms.se + pol.eps);
}

TEST_CASE("finite atomic root: survival law matches the two-stage simulation") {
  // Root Levy measure w delta_{eta*} with eta* = a* delta_{b*}; every root
  // atom feeds one inner gamma CRM whose jumps all sit at b*, so the margin
  // mass at t is K(t, b*) Gamma(c a*, beta) per root copy.
  const double w = 1.4, a_star = 0.8, b_star = 0.3;
  LevyCharacteristics mu0;
  mu0.d = 1;
  mu0.families.push_back(std::make_shared<FiniteMeasureFamily>(
      1, std::vector<std::pair<double, MeasurePtr>>{{w, atomic1(a_star, b_star)}}));

  auto rho = make_gamma_jumps();
  auto dl = make_dykstra_laud_kernel(1.0);
  auto ch = subordinate(mu0, {rho}, {dl});
  REQUIRE(ch.families.size() == 1);
  CHECK(ch.families[0]->describe().rfind("subordinated", 0) == 0);

  const double t = 1.3;
  const double K = dl.primitive(t, b_star);

  auto hook = ch.families[0]->mean_mass_functional({t});
  REQUIRE(hook.has_value());
  CHECK(*hook == doctest::Approx(w * a_star * K).epsilon(1e-12));

  TruncationPolicy pol;
  pol.eps = 1e-3;
  pol.ref = {2.0};
  Rng rng(7213);
  const int n = 20000;
  std::vector<double> lib, lib_mass, oracle;
  lib.reserve(n);
  oracle.reserve(n);
  double parts_sum = 0;
  for (int r = 0; r < n; ++r) {
    Rng rr = rng.split(static_cast<std::uint64_t>(r));
    auto real = sample_idem(ch, pol, rr);
    double m = real.measure->orthant_mass({t});
    lib.push_back(std::exp(-m));
    lib_mass.push_back(m);
    parts_sum += static_cast<double>(real.parts.size()) - 1;
    auto sum = std::dynamic_pointer_cast<const SumMeasure>(real.measure);
    REQUIRE(sum);
    for (std::size_t p = 1; p < sum->parts().size(); ++p) {
      CHECK_FALSE(is_zero(*sum->parts()[p]));
      CHECK(real.parts[p] == PartKind::nu_atom);
    }
  }
  Rng org(9551);
  for (int r = 0; r < n; ++r) {
    Rng rr = org.split(static_cast<std::uint64_t>(r));
    long copies = rr.poisson(w);
    double m = 0;
    for (long j = 0; j < copies; ++j) m += K * rr.gamma(a_star);
    oracle.push_back(std::exp(-m));
  }
  auto ml = mean_se(lib), mo = mean_se(oracle), mm = mean_se(lib_mass);
  double tol = 3 * std::sqrt(ml.se * ml.se + mo.se * mo.se) + pol.eps;
  CHECK(std::fabs(ml.mean - mo.mean) <= tol);
  // Closed form of the same law cross-checks the oracle.
  double closed = std::exp(-w * (1 - std::pow(1 + K, -a_star)));
  CHECK(std::fabs(mo.mean - closed) <= 3 * mo.se);
  CHECK(std::fabs(mm.mean - *hook) <= 3 * mm.se + pol.eps);
  // One product-line part per root atom.
  CHECK(parts_sum / n == doctest::Approx(w).epsilon(0.05));
}

TEST_CASE("root CRM with root kernel: marginal Laplace transform") {
  // Root: base 0.4 delta_{0.6} plus a gamma CRM on locations (0, 1.5),
  // spread by a rectangular kernel; two margins with their own jump
  // densities and kernels.
  auto rho0 = make_gamma_jumps(1.0, 1.0);
  auto rho1 = make_gamma_jumps(0.7, 1.2);
  auto rho2 = make_gamma_jumps(1.1, 0.9);
  auto k0 = make_rectangular_kernel(1.0, 0.5);
  auto k1 = make_dykstra_laud_kernel(0.8);
  auto k2 = make_ou_kernel(2.0);

  LevyCharacteristics mu0 = make_crm(1, atomic1(0.4, 0.6), rho0, lebesgue1(1.0, 0.0, 1.5));
  SubordinationOptions opt;
  opt.root_kernel = k0;
  auto ch = subordinate(mu0, {rho1, rho2}, {k1, k2}, opt);
  REQUIRE(ch.families.size() == 3);

  // Campbell: E e^{-M_i(t)} = exp(-A_i - B_i) with the nu_1 exponent
  // A_i = int phi_i(K_i(t,b)) alpha0^{(k0)}(db) and the nu_2 exponent
  // B_i = int phi_0(int phi_i(K_i(t,b)) k0(b,b0) db) g0(db0).
  auto closed = [&](int i, double t) {
    const auto& rho = i == 0 ? rho1 : rho2;
    const auto& ki = i == 0 ? k1 : k2;
    auto inner = [&](double b) { return rho.phi(ki.primitive(t, b)); };
    double A = 0.4 * integrate([&](double b) { return inner(b) * k0.eval(b, 0.6); }, 0.0,
                               ki.cutoff(t))
                         .value;
    double B = integrate(
                   [&](double b0) {
                     double blo = std::max(0.0, b0 - 0.5);
                     double bhi = std::min(b0 + 0.5, ki.cutoff(t));
                     if (bhi <= blo) return 0.0;
                     double J = integrate([&](double b) { return inner(b) * k0.eval(b, b0); },
                                          blo, bhi, 1e-9)
                                    .value;
                     return rho0.phi(J);
                   },
                   0.0, 1.5, 1e-8)
                   .value;
    return std::exp(-A - B);
  };

  TruncationPolicy pol;
  pol.eps = 5e-4;
  pol.ref = {3.0, 3.0};
  Rng rng(90271);
  const int n = 8000;
  std::vector<std::vector<double>> surv(3);
  const double ts[3] = {0.8, 2.0, 1.2};
  const int axes[3] = {0, 0, 1};
  for (int r = 0; r < n; ++r) {
    Rng rr = rng.split(static_cast<std::uint64_t>(r));
    auto real = sample_idem(ch, pol, rr);
    CHECK(real.omitted_bound <= 3 * pol.eps + 1e-12);
    for (int q = 0; q < 3; ++q) {
      Point x(2, kInf);
      x[axes[q]] = ts[q];
      surv[q].push_back(std::exp(-real.measure->orthant_mass(x)));
    }
  }
  for (int q = 0; q < 3; ++q) {
    auto ms = mean_se(surv[q]);
    double want = closed(axes[q], ts[q]);
    CHECK(std::fabs(ms.mean - want) <= 3 * ms.se + pol.eps + 2e-3);
  }
}

TEST_CASE("subordinated family: nested-MC integrator and validation") {
  const double w = 0.9, a_star = 0.6, b_star = 0.4;
  LevyCharacteristics mu0;
  mu0.d = 1;
  mu0.families.push_back(std::make_shared<FiniteMeasureFamily>(
      1, std::vector<std::pair<double, MeasurePtr>>{{w, atomic1(a_star, b_star)}}));
  SubordinationOptions opt;
  opt.inner_draws = 16;
  auto ch = subordinate(mu0, {make_gamma_jumps()}, {make_dykstra_laud_kernel(1.0)}, opt);

  auto rep = validate(ch);
  CHECK(rep.integrability_pass);
  CHECK_FALSE(rep.support_warning);
  // min{mass, 1} never exceeds the mean mass.
  for (std::size_t i = 0; i < rep.families[0].min_functional.size(); ++i) {
    Point u(1, std::ldexp(1.0, static_cast<int>(i)));
    CHECK(rep.families[0].min_functional[i] <=
          *ch.families[0]->mean_mass_functional(u) + 1e-9);
    CHECK(rep.families[0].min_functional[i] <= w + 1e-9);
  }

  // The integrator pins its inner streams to the root atom, so repeated
  // calls agree exactly.
  bool c1 = true, c2 = true;
  auto F = [](const ExponentMeasure& eta) { return std::min(eta.orthant_mass({1.0}), 1.0); };
  double v1 = ch.families[0]->integrate(F, &c1);
  double v2 = ch.families[0]->integrate(F, &c2);
  CHECK(c1);
  CHECK(v1 == v2);
  CHECK(v1 > 0);
  CHECK(v1 <= w);
}

TEST_CASE("subordinate input validation") {
  LevyCharacteristics mu0;
  mu0.d = 1;
  mu0.base = lebesgue1(1.0, 0.0, 1.0);
  auto rho = make_gamma_jumps();
  auto dl = make_dykstra_laud_kernel(1.0);

  LevyCharacteristics bad = mu0;
  bad.d = 2;
  CHECK_THROWS_AS(subordinate(bad, {rho}, {dl}), std::invalid_argument);
  CHECK_THROWS_AS(subordinate(mu0, {rho, rho}, {dl}), std::invalid_argument);

  auto broken = make_dykstra_laud_kernel(1.0);
  broken.bound = 0.2;
  CHECK_THROWS_AS(subordinate(mu0, {rho}, {broken}), std::invalid_argument);
  broken.attested = true;
  CHECK_NOTHROW(subordinate(mu0, {rho}, {broken}));
}
