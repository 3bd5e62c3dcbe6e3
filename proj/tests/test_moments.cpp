#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "minid/moments.hpp"
#include "minid/subordinate.hpp"

using namespace minid;

namespace {

MeasurePtr bundle1(LinePtr l) {
  std::vector<LinePtr> ls{std::move(l)};
  return std::make_shared<LineBundleMeasure>(1, std::move(ls));
}

MeasurePtr atom1(double w, double loc) {
  return std::make_shared<AtomicMeasure>(1, std::vector<WeightedAtom>{{w, {loc}}});
}

// Gamma CRM with unit shape and rate dropping jumps on (0,1).
LevyCharacteristics gamma_crm01() {
  return make_crm(1, zero_measure(1), make_gamma_jumps(), bundle1(make_lebesgue_line(1.0, 0.0, 1.0)));
}

LevyCharacteristics smoothed_dl_chars() {
  LevyCharacteristics ch;
  ch.d = 1;
  ch.base = zero_measure(1);
  ch.families.push_back(std::make_shared<SmoothedCrmFamily>(
      1, 0, make_gamma_jumps(1.3, 1.5), atom1(1.0, 0.5), make_dykstra_laud_kernel(0.8)));
  return ch;
}

// Forwarding family that withholds its closed forms, forcing the finite-
// difference moment path onto an exactly evaluable Laplace transform.
class OpaqueFamily : public AtomFamily {
 public:
  explicit OpaqueFamily(FamilyPtr inner) : inner_(std::move(inner)) {}
  int dim() const override { return inner_->dim(); }
  std::string describe() const override { return inner_->describe(); }
  double total_mass() const override { return inner_->total_mass(); }
  double integrate(const MeasureFn& F, bool* converged) const override {
    return inner_->integrate(F, converged);
  }
  std::vector<MeasurePtr> sample_prm_atoms(const TruncationPolicy& pol, Rng& rng,
                                           double* omitted) const override {
    return inner_->sample_prm_atoms(pol, rng, omitted);
  }

 private:
  FamilyPtr inner_;
};

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  double m = mean_of(v), s2 = 0;
  for (double x : v) s2 += (x - m) * (x - m);
  return std::sqrt(s2 / (static_cast<double>(v.size()) - 1) / static_cast<double>(v.size()));
}

} // namespace

TEST_CASE("laplace transform: closed forms, monotonicity, weight gate") {
  auto crm = gamma_crm01();

  SUBCASE("deterministic hazard factorizes and z = 0 is exactly one") {
    LevyCharacteristics ch;
    ch.d = 2;
    ch.base = std::make_shared<AtomicMeasure>(
        2, std::vector<WeightedAtom>{{0.7, {0.5, 0.8}}, {0.4, {1.3, 0.2}}});
    LaplaceQuery q;
    q.points = {{0.6, 0.9}, {1.5, 0.1}};
    q.weights = {0.4, 1.1};
    double expo = 0;
    for (std::size_t i = 0; i < 2; ++i)
      expo += q.weights[i] * ch.base->orthant_mass(q.points[i]);
    CHECK(laplace_transform(ch, q) == doctest::Approx(std::exp(-expo)).epsilon(1e-12));
    q.weights = {0.0, 0.0};
    CHECK(laplace_transform(ch, q) == 1.0);
  }

  SUBCASE("gamma jumps on unit locations: exp(-x log(1+z))") {
    for (double z : {0.8, 2.0, -0.3}) {
      LaplaceQuery q;
      q.points = {{0.6}};
      q.weights = {z};
      CHECK(laplace_transform(crm, q) ==
            doctest::Approx(std::exp(-0.6 * std::log1p(z))).epsilon(1e-7));
    }
  }

  SUBCASE("monotone in the weights and in the probe points") {
    double prev = kInf;
    for (double z : {0.0, 0.3, 1.0, 2.5}) {
      LaplaceQuery q{{{0.5}}, {z}};
      double v = laplace_transform(crm, q);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
    prev = kInf;
    for (double x : {0.2, 0.5, 0.9}) {
      LaplaceQuery q{{{x}}, {1.0}};
      double v = laplace_transform(crm, q);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }

  SUBCASE("negative weights demand a certificate") {
    auto sm = smoothed_dl_chars();
    LaplaceQuery q{{{1.0}}, {-0.2}};
    CHECK_THROWS_AS(laplace_transform(sm, q), std::domain_error);
    // Gamma tails admit small exponential moments, so the same query passes.
    CHECK(laplace_transform(crm, q) > 1.0);
  }

  SUBCASE("query validation") {
    CHECK_THROWS_AS(laplace_transform(crm, LaplaceQuery{}), std::invalid_argument);
    CHECK_THROWS_AS(laplace_transform(crm, LaplaceQuery{{{0.5, 0.5}}, {1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(laplace_transform(crm, LaplaceQuery{{{0.5}}, {1.0, 2.0}}),
                    std::invalid_argument);
  }
}

TEST_CASE("hazard moments: exact cumulant assembly") {
  SUBCASE("deterministic base reduces to powers of the hazard") {
    LevyCharacteristics ch;
    ch.d = 2;
    ch.base = std::make_shared<AtomicMeasure>(2, std::vector<WeightedAtom>{{2.0, {1.0, 1.0}}});
    auto r = hazard_moments(ch, {{1.0, 2.0}}, {1});
    CHECK(r.exact);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
  }

  auto crm = gamma_crm01();

  SUBCASE("first and second moments of the gamma hazard mass") {
    auto m1 = hazard_moments(crm, {{0.5}}, {1});
    CHECK(m1.exact);
    CHECK(m1.value == doctest::Approx(0.5).epsilon(1e-8));
    auto m2 = hazard_moments(crm, {{0.5}}, {2});
    CHECK(m2.exact);
    // kappa_2 = 0.5 Gamma(2), so the variance matches the mean.
    CHECK(m2.value == doctest::Approx(0.75).epsilon(1e-8));
  }

  SUBCASE("mixed moment couples through the overlap of the complements") {
    auto r = hazard_moments(crm, {{0.3}, {0.7}}, {1, 1});
    CHECK(r.exact);
    CHECK(r.value == doctest::Approx(0.51).epsilon(1e-8));
    // Duplicated probe points collapse to a single higher order.
    auto dup = hazard_moments(crm, {{0.5}, {0.5}}, {1, 1});
    auto ord = hazard_moments(crm, {{0.5}}, {2});
    CHECK(dup.value == doctest::Approx(ord.value).epsilon(1e-12));
  }

  SUBCASE("fourth moment assembles all fifteen partitions") {
    // kappa_q = 0.5 Gamma(q): 3 + 4*1*0.5 + 3*0.25 + 6*0.5*0.25 + 0.5^4.
    auto r = hazard_moments(crm, {{0.5}}, {4});
    CHECK(r.exact);
    CHECK(r.value == doctest::Approx(6.5625).epsilon(1e-7));
  }

  SUBCASE("stable jumps have no mean: divergence is the answer") {
    auto st = make_crm(1, zero_measure(1), make_stable_jumps(0.5),
                       bundle1(make_lebesgue_line(1.0, 0.0, 1.0)));
    auto r = hazard_moments(st, {{0.5}}, {1});
    CHECK(r.exact);
    CHECK(std::isinf(r.value));
  }

  SUBCASE("order validation") {
    CHECK_THROWS_AS(hazard_moments(crm, {{0.5}}, {0}), std::invalid_argument);
    CHECK_THROWS_AS(hazard_moments(crm, {{0.5}, {0.7}}, {3, 2}), std::invalid_argument);
    CHECK_THROWS_AS(hazard_moments(crm, {{0.5}}, {1, 1}), std::invalid_argument);
  }
}

TEST_CASE("hazard moments: finite differences track the exact path") {
  LevyCharacteristics plain;
  plain.d = 2;
  plain.base = std::make_shared<AtomicMeasure>(2, std::vector<WeightedAtom>{{0.2, {0.3, 0.4}}});
  auto inner = std::make_shared<FiniteMeasureFamily>(
      2, std::vector<std::pair<double, MeasurePtr>>{
             {0.7, std::make_shared<LineBundleMeasure>(
                       2, std::vector<LinePtr>{make_exponential_hazard_line(1.0),
                                               make_exponential_hazard_line(0.6)})},
             {0.4, std::make_shared<AtomicMeasure>(
                       2, std::vector<WeightedAtom>{{1.0, {0.5, 0.9}}})}});
  plain.families.push_back(inner);
  LevyCharacteristics opaque = plain;
  opaque.families = {std::make_shared<OpaqueFamily>(inner)};

  std::vector<Point> pts = {{0.6, 0.8}, {1.5, 0.5}};
  // Third-order stencils divide by h^3 ~ 1e-11, so roundoff caps their
  // accuracy well above the second-order cases.
  for (auto orders : std::vector<std::vector<int>>{{1, 1}, {2, 1}, {1, 2}}) {
    auto ex = hazard_moments(plain, pts, orders);
    auto fd = hazard_moments(opaque, pts, orders);
    CHECK(ex.exact);
    CHECK_FALSE(fd.exact);
    double tol = orders[0] + orders[1] > 2 ? 5e-4 : 1e-7;
    CHECK(fd.value == doctest::Approx(ex.value).epsilon(tol));
    CHECK(fd.err <= tol * std::max(std::fabs(fd.value), 1.0));
  }

  // Smoothed families publish only their mean hook; the second moment runs
  // through the difference ladder against a hand-integrated oracle.
  auto sm = smoothed_dl_chars();
  // K(1.25, 0.5) = 0.8 * 0.75, kappa_1 = (1.3/1.5) K, kappa_2 = (1.3/1.5^2) K^2.
  double kk = 0.8 * 0.75;
  double kap1 = 1.3 / 1.5 * kk, kap2 = 1.3 / (1.5 * 1.5) * kk * kk;
  auto m1 = hazard_moments(sm, {{1.25}}, {1});
  CHECK(m1.exact);
  CHECK(m1.value == doctest::Approx(kap1).epsilon(1e-9));
  auto m2 = hazard_moments(sm, {{1.25}}, {2});
  CHECK_FALSE(m2.exact);
  CHECK(m2.value == doctest::Approx(kap2 + kap1 * kap1).epsilon(1e-4));
}

TEST_CASE("order-one moments agree with the log-derivative of the transform") {
  auto crm = gamma_crm01();
  auto sm = smoothed_dl_chars();
  struct Probe {
    LevyCharacteristics ch;
    double t;
    bool central;
  };
  std::vector<Probe> probes = {{crm, 0.5, true}, {sm, 1.25, false}};
  for (const auto& pr : probes) {
    double direct = hazard_moments(pr.ch, {{pr.t}}, {1}).value;
    auto logl = [&](double z) {
      return std::log(laplace_transform(pr.ch, LaplaceQuery{{{pr.t}}, {z}}));
    };
    // Families without exponential-moment certificates get the one-sided
    // ladder; O(h^3) after two Richardson sweeps is ample at h = 1e-3.
    auto slope = [&](double h) {
      return pr.central ? (logl(-h) - logl(h)) / (2 * h) : -logl(h) / h;
    };
    double d1 = slope(1e-3), d2 = slope(5e-4), d4 = slope(2.5e-4);
    double fd;
    if (pr.central) {
      fd = (4 * d2 - d1) / 3;
    } else {
      double r1 = 2 * d2 - d1, r2 = 2 * d4 - d2;
      fd = (4 * r2 - r1) / 3;
    }
    CHECK(fd == doctest::Approx(direct).epsilon(1e-6));
  }
}

TEST_CASE("mean functional moments") {
  SUBCASE("unit-rate deterministic hazard gives unit exponential moments") {
    LevyCharacteristics ch;
    ch.d = 1;
    ch.base = bundle1(make_lebesgue_line(1.0, 0.0));
    CHECK(mean_functional_moment(ch, identity_fn(), 1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(mean_functional_moment(ch, identity_fn(), 2) == doctest::Approx(1.0).epsilon(1e-8));
  }

  SUBCASE("atomic gamma locations over a drifting base: exact segment sums") {
    LevyCharacteristics ch;
    ch.d = 1;
    ch.base = bundle1(make_lebesgue_line(1.0, 0.0));
    std::vector<double> w = {0.5, 0.7, 0.3}, b = {0.25, 0.8, 1.6};
    ch.families.push_back(std::make_shared<CrmFamily>(
        1, make_gamma_jumps(),
        std::make_shared<AtomicMeasure>(
            1, std::vector<WeightedAtom>{{w[0], {b[0]}}, {w[1], {b[1]}}, {w[2], {b[2]}}})));

    // S(t) drops by 2^{-w_k} past each location, so E[I] telescopes over the
    // four segments.
    auto seg_weight = [&](double t) {
      double lw = 0;
      for (std::size_t k = 0; k < 3; ++k)
        if (b[k] <= t) lw += w[k] * std::log(2.0);
      return lw;
    };
    std::vector<double> cuts = {0.0, 0.25, 0.8, 1.6, kInf};
    double m1 = 0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      double f = std::exp(-seg_weight(cuts[s]));
      m1 += f * (std::exp(-cuts[s]) - (cuts[s + 1] == kInf ? 0.0 : std::exp(-cuts[s + 1])));
    }
    CHECK(mean_functional_moment(ch, identity_fn(), 1) == doctest::Approx(m1).epsilon(1e-6));

    // Pairs of segments with the shared-coverage Laplace weight log(1 + #covered).
    double m2 = 0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      for (std::size_t r = 0; r + 1 < cuts.size(); ++r) {
        double lw = 0;
        for (std::size_t k = 0; k < 3; ++k) {
          int cover = (b[k] <= cuts[s] ? 1 : 0) + (b[k] <= cuts[r] ? 1 : 0);
          lw += w[k] * std::log(1.0 + cover);
        }
        double is = std::exp(-cuts[s]) - (cuts[s + 1] == kInf ? 0.0 : std::exp(-cuts[s + 1]));
        double ir = std::exp(-cuts[r]) - (cuts[r + 1] == kInf ? 0.0 : std::exp(-cuts[r + 1]));
        m2 += std::exp(-lw) * is * ir;
      }
    }
    CHECK(mean_functional_moment(ch, identity_fn(), 2) == doctest::Approx(m2).epsilon(1e-6));
  }

  auto ntr = make_crm(1, zero_measure(1), make_gamma_jumps(), bundle1(make_lebesgue_line(1.0, 0.0)));

  SUBCASE("homogeneous gamma prior: mean 1/log 2, confirmed by simulation") {
    double lib = mean_functional_moment(ntr, identity_fn(), 1);
    CHECK(lib == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-5));

    // The sampler needs finite location mass; cutting locations at 40 moves
    // the mean by under 2^{-40}, far below the Monte Carlo noise.
    auto cut = make_crm(1, zero_measure(1), make_gamma_jumps(),
                        bundle1(make_lebesgue_line(1.0, 0.0, 40.0)));
    TruncationPolicy pol;
    pol.ref = {1.0};
    Rng rng(7411);
    std::vector<double> means;
    for (int r = 0; r < 400; ++r) {
      Rng sub = rng.split(static_cast<std::uint64_t>(r));
      auto real = sample_idem(cut, pol, sub);
      auto sum = std::dynamic_pointer_cast<const SumMeasure>(real.measure);
      REQUIRE(sum);
      std::vector<WeightedAtom> atoms;
      for (std::size_t p = 1; p < sum->parts().size(); ++p) {
        auto at = std::dynamic_pointer_cast<const AtomicMeasure>(sum->parts()[p]);
        REQUIRE(at);
        atoms.insert(atoms.end(), at->atoms().begin(), at->atoms().end());
      }
      std::sort(atoms.begin(), atoms.end(),
                [](const WeightedAtom& x, const WeightedAtom& y) { return x.loc[0] < y.loc[0]; });
      double mass = 0, last = 0, integral = 0;
      for (const auto& a : atoms) {
        integral += (a.loc[0] - last) * std::exp(-mass);
        mass += a.w;
        last = a.loc[0];
      }
      integral += (40.0 - last) * std::exp(-mass);
      means.push_back(integral);
    }
    CHECK(std::fabs(mean_of(means) - lib) <= 3 * se_of(means));
  }

  SUBCASE("change of variables: squaring the axis or its locations") {
    MonotoneFn sq;
    sq.name = "square";
    sq.fwd = [](double t) { return t * t; };
    sq.inv = [](double t) { return std::sqrt(t); };
    sq.certified = true;
    double via_f = mean_functional_moment(ntr, sq, 1);

    // Pushforward of unit-rate locations under t -> t^2.
    auto pushed = std::make_shared<ClosedFormLine>(
        [](double s) { return s <= 0 ? 0.0 : std::sqrt(s); },
        [](double s) { return s <= 0 ? 0.0 : 0.5 / std::sqrt(s); }, kInf, 0.0,
        [](double p) { return p * p; });
    auto moved = make_crm(1, zero_measure(1), make_gamma_jumps(), bundle1(pushed));
    double via_chars = mean_functional_moment(moved, identity_fn(), 1);

    double closed = 2.0 / (std::log(2.0) * std::log(2.0));
    CHECK(via_f == doctest::Approx(closed).epsilon(1e-4));
    CHECK(via_chars == doctest::Approx(via_f).epsilon(1e-4));
  }

  SUBCASE("defective distributions and bad arguments are rejected") {
    LevyCharacteristics fin;
    fin.d = 1;
    fin.base = atom1(1.0, 0.5); // survival plateaus at e^{-1}: infinite mean
    CHECK_THROWS_AS(mean_functional_moment(fin, identity_fn(), 1), std::runtime_error);

    CHECK_THROWS_AS(mean_functional_moment(ntr, identity_fn(), 4), std::invalid_argument);
    MonotoneFn raw;
    raw.fwd = raw.inv = [](double t) { return t; };
    CHECK_THROWS_AS(mean_functional_moment(ntr, raw, 1), std::invalid_argument);
    LevyCharacteristics two;
    two.d = 2;
    CHECK_THROWS_AS(mean_functional_moment(two, identity_fn(), 1), std::invalid_argument);
  }
}

TEST_CASE("association diagnostics") {
  TruncationPolicy pol;
  pol.ref = {1.0};

  SUBCASE("deterministic prior: survival covariances vanish identically") {
    LevyCharacteristics ch;
    ch.d = 1;
    ch.base = bundle1(make_lebesgue_line(1.0, 0.0));
    Rng rng(311);
    auto rep = association_diagnostic(ch, {{{0.3}, {0.6}}}, 500, pol, rng);
    CHECK(rep.pass);
    CHECK(std::fabs(rep.pairs[0].cov_surv) <= 1e-30);
    CHECK(rep.pairs[0].cov_event >= -3 * rep.pairs[0].se_event);
  }

  SUBCASE("gamma prior: shared jumps push both covariances positive") {
    auto crm = gamma_crm01();
    Rng rng(313);
    auto rep = association_diagnostic(crm, {{{0.3}, {0.6}}}, 4000, pol, rng);
    CHECK(rep.pass);
    CHECK(rep.pairs[0].cov_surv > 3 * rep.pairs[0].se_surv);
    CHECK(rep.pairs[0].cov_event > 3 * rep.pairs[0].se_event);
  }

  SUBCASE("independent components: cross covariance is statistical zero") {
    LevyCharacteristics ch;
    ch.d = 2;
    ch.base = zero_measure(2);
    ch.families.push_back(std::make_shared<CrmFamily>(
        2, make_gamma_jumps(),
        std::make_shared<LineBundleMeasure>(
            2, std::vector<LinePtr>{make_lebesgue_line(1.0, 0.0, 1.0), nullptr})));
    ch.families.push_back(std::make_shared<CrmFamily>(
        2, make_gamma_jumps(),
        std::make_shared<LineBundleMeasure>(
            2, std::vector<LinePtr>{nullptr, make_lebesgue_line(1.0, 0.0, 1.0)})));
    TruncationPolicy pol2;
    pol2.ref = {1.0, 1.0};
    Rng rng(317);
    auto rep = association_diagnostic(ch, {{{0.4, kInf}, {kInf, 0.4}}}, 4000, pol2, rng);
    CHECK(rep.pass);
    CHECK(std::fabs(rep.pairs[0].cov_surv) <= 3 * rep.pairs[0].se_surv + 1e-9);
  }
}

TEST_CASE("monte carlo draws reconcile with the laplace transform") {
  struct Preset {
    LevyCharacteristics ch;
    LaplaceQuery q;
    Point ref;
  };
  std::vector<Preset> presets;

  {
    LevyCharacteristics ch;
    ch.d = 2;
    ch.base = std::make_shared<AtomicMeasure>(2, std::vector<WeightedAtom>{{0.3, {0.7, 0.9}}});
    ch.families.push_back(std::make_shared<FiniteMeasureFamily>(
        2, std::vector<std::pair<double, MeasurePtr>>{
               {0.8, std::make_shared<LineBundleMeasure>(
                         2, std::vector<LinePtr>{make_exponential_hazard_line(1.0),
                                                 make_exponential_hazard_line(1.0)})}}));
    presets.push_back({ch, {{{0.5, 0.4}, {1.2, kInf}}, {1.0, 0.7}}, {1.0, 1.0}});
  }
  presets.push_back({gamma_crm01(), {{{0.35}, {0.8}}, {1.0, 0.5}}, {1.0}});
  presets.push_back({smoothed_dl_chars(), {{{1.1}}, {1.0}}, {1.0}});

  Rng rng(901);
  int preset_id = 0;
  for (const auto& pre : presets) {
    CAPTURE(preset_id);
    double lib = laplace_transform(pre.ch, pre.q);
    TruncationPolicy pol;
    pol.ref = pre.ref;
    const int n = 100000;
    std::vector<double> vals;
    vals.reserve(n);
    double zsum = 0, omitted = 0;
    for (double z : pre.q.weights) zsum += z;
    Rng lane = rng.split(static_cast<std::uint64_t>(preset_id));
    for (int r = 0; r < n; ++r) {
      Rng sub = lane.split(static_cast<std::uint64_t>(r));
      auto real = sample_idem(pre.ch, pol, sub);
      omitted += real.omitted_bound;
      double expo = 0;
      for (std::size_t i = 0; i < pre.q.points.size(); ++i)
        expo += pre.q.weights[i] * real.measure->orthant_mass(pre.q.points[i]);
      vals.push_back(std::exp(-expo));
    }
    double slack = 4 * se_of(vals) + zsum * omitted / n;
    CHECK(std::fabs(mean_of(vals) - lib) <= slack);
    ++preset_id;
  }
}
