#include <algorithm>
#include <cmath>
#include <memory>

#include "doctest.h"
#include "minid/sampling.hpp"
#include "minid/stats.hpp"

using namespace minid;

namespace {

MeasurePtr bundle2(LinePtr a, LinePtr b) {
  std::vector<LinePtr> ls{std::move(a), std::move(b)};
  return std::make_shared<LineBundleMeasure>(2, std::move(ls));
}

// Canonical restricted-growth sanity of an extracted scenario.
void check_scenario_shape(const HittingScenario& sc) {
  REQUIRE(sc.assignment.size() == sc.index_set.size());
  if (sc.assignment.empty()) {
    CHECK(sc.blocks == 0);
    return;
  }
  CHECK(sc.assignment[0] == 0);
  int running = 0;
  for (int l : sc.assignment) {
    CHECK(l >= 0);
    CHECK(l <= running + 1);
    running = std::max(running, l);
  }
  CHECK(sc.blocks == running + 1);
  CHECK(sc.blocks >= 1);
  CHECK(sc.blocks <= static_cast<int>(sc.index_set.size()));
}

double binom_se(double p, int n) { return std::sqrt(p * (1 - p) / n); }

} // namespace

TEST_CASE("single draws carry their latent atoms") {
  Rng base(5021);

  // One atom of mass 1: hit probability 1 - e^{-1}.
  auto one = std::make_shared<AtomicMeasure>(1, std::vector<WeightedAtom>{{1.0, {0.7}}});
  const int n1 = 20000;
  int hits = 0;
  for (int r = 0; r < n1; ++r) {
    Rng rr = base.split(static_cast<std::uint64_t>(r));
    auto [x, prm] = sample_minid_latent(*one, rr);
    auto sc = extract_hitting_scenario(prm, {x});
    check_scenario_shape(sc);
    if (x[0] != kInf) {
      ++hits;
      CHECK(x[0] == 0.7);
      REQUIRE(prm.atoms.size() == 1);
      CHECK(prm.atoms[0].exact);
      CHECK(sc.blocks == 1);
    } else {
      CHECK(prm.atoms.empty());
      CHECK(sc.blocks == 0);
    }
  }
  double p1 = -std::expm1(-1.0);
  CHECK(std::fabs(static_cast<double>(hits) / n1 - p1) <= 3 * binom_se(p1, n1));

  // Product-line with hazard t per margin: unit exponential components.
  auto lines = bundle2(make_lebesgue_line(1.0, 0.0), make_lebesgue_line(1.0, 0.0));
  const int n2 = 8000;
  std::vector<double> m0, m1, ref;
  Rng expo(771);
  for (int r = 0; r < n2; ++r) {
    Rng rr = base.split(100000 + static_cast<std::uint64_t>(r));
    auto [x, prm] = sample_minid_latent(*lines, rr);
    REQUIRE(x[0] < kInf);
    m0.push_back(x[0]);
    m1.push_back(x[1]);
    ref.push_back(expo.exponential());
    // Independent margins come from distinct internal points.
    auto sc = extract_hitting_scenario(prm, {x});
    CHECK(sc.blocks == 2);
  }
  CHECK(two_sample_ks(m0, ref).p > 0.005);
  CHECK(two_sample_ks(m1, ref).p > 0.005);

  // Two atoms in d=2: the four hit patterns are enumerable.
  auto two = std::make_shared<AtomicMeasure>(
      2, std::vector<WeightedAtom>{{2.0, {1.0, 1.0}}, {1.0, {0.0, 3.0}}});
  double pa = -std::expm1(-2.0), pb = -std::expm1(-1.0);
  int c_both = 0, c_a = 0, c_b = 0, c_none = 0;
  const int n3 = 30000;
  for (int r = 0; r < n3; ++r) {
    Rng rr = base.split(200000 + static_cast<std::uint64_t>(r));
    auto [x, prm] = sample_minid_latent(*two, rr);
    auto sc = extract_hitting_scenario(prm, {x});
    check_scenario_shape(sc);
    if (x[0] == 0.0 && x[1] == 1.0) {
      ++c_both; // both atoms present, minimum mixes them
      CHECK(sc.blocks == 2);
    } else if (x[0] == 1.0 && x[1] == 1.0) {
      ++c_a;
      CHECK(sc.blocks == 1);
    } else if (x[0] == 0.0 && x[1] == 3.0) {
      ++c_b;
      CHECK(sc.blocks == 1);
    } else {
      ++c_none;
      CHECK(x[0] == kInf);
      CHECK(x[1] == kInf);
    }
  }
  auto near = [&](int c, double p) {
    CHECK(std::fabs(static_cast<double>(c) / n3 - p) <= 3 * binom_se(p, n3));
  };
  near(c_both, pa * pb);
  near(c_a, pa * (1 - pb));
  near(c_b, (1 - pa) * pb);
  near(c_none, (1 - pa) * (1 - pb));
}

TEST_CASE("deterministic base: iid columns of singletons") {
  LevyCharacteristics ch;
  ch.d = 2;
  ch.base = bundle2(make_lebesgue_line(1.0, 0.0), make_lebesgue_line(1.0, 0.0));

  TruncationPolicy pol;
  Rng base(660);
  const int n = 4000;
  std::vector<double> a00, b02, integ;
  for (int r = 0; r < n; ++r) {
    Rng rr = base.split(static_cast<std::uint64_t>(r));
    auto seq = sample_sequence(ch, 3, pol, rr, SequenceMode::conditional);
    auto sc = extract_hitting_scenario(seq.latent, seq.columns);
    check_scenario_shape(sc);
    // Continuous base points never repeat across coordinates or columns.
    CHECK(sc.blocks == 6);
    a00.push_back(seq.columns[0][0]);

    Rng r2 = base.split(1000000 + static_cast<std::uint64_t>(r));
    auto seq2 = sample_sequence(ch, 3, pol, r2, SequenceMode::conditional);
    b02.push_back(seq2.columns[2][0]);

    Rng r3 = base.split(2000000 + static_cast<std::uint64_t>(r));
    auto seq3 = sample_sequence(ch, 3, pol, r3, SequenceMode::integrated);
    integ.push_back(seq3.columns[0][0]);
  }
  // Exchangeability across columns, and mode agreement, via marginal law.
  CHECK(two_sample_ks(a00, b02).p > 0.005);
  CHECK(two_sample_ks(a00, integ).p > 0.005);
}

TEST_CASE("conditional and integrated modes agree for the gamma-CRM preset") {
  std::vector<LinePtr> l{make_lebesgue_line(1.0, 0.0, 1.0)};
  auto locs = std::make_shared<LineBundleMeasure>(1, std::move(l));
  auto ch = make_crm(1, zero_measure(1), make_gamma_jumps(), locs);

  TruncationPolicy pol;
  pol.eps = 1e-3;
  pol.ref = {1.0};
  Rng base(8112);
  const int n = 25000;
  std::vector<double> cond, integ;
  for (int r = 0; r < n; ++r) {
    Rng rc = base.split(static_cast<std::uint64_t>(r));
    cond.push_back(sample_sequence(ch, 1, pol, rc, SequenceMode::conditional).columns[0][0]);
    Rng ri = base.split(3000000 + static_cast<std::uint64_t>(r));
    integ.push_back(sample_sequence(ch, 1, pol, ri, SequenceMode::integrated).columns[0][0]);
  }
  CHECK(two_sample_ks(cond, integ).p > 0.005);

  // Shared jumps make exact ties between observations; the extracted
  // partition is the tie partition, draw by draw.
  const int n2 = 4000;
  int ties = 0;
  for (int r = 0; r < n2; ++r) {
    Rng rr = base.split(6000000 + static_cast<std::uint64_t>(r));
    auto seq = sample_sequence(ch, 2, pol, rr, SequenceMode::conditional);
    auto sc = extract_hitting_scenario(seq.latent, seq.columns);
    check_scenario_shape(sc);
    double x0 = seq.columns[0][0], x1 = seq.columns[1][0];
    if (x0 == kInf || x1 == kInf) continue;
    bool tie = x0 == x1;
    ties += tie;
    CHECK(sc.blocks == (tie ? 1 : 2));
  }
  CHECK(ties > 0);
}

TEST_CASE("min of two half-intensity draws matches one full draw") {
  auto atom = [](double w) {
    return std::make_shared<AtomicMeasure>(1, std::vector<WeightedAtom>{{w, {0.3}}});
  };
  std::vector<LinePtr> l{make_lebesgue_line(1.0, 0.0, 1.0)};
  auto locs = std::make_shared<LineBundleMeasure>(1, std::move(l));
  auto full = make_crm(1, atom(0.4), make_gamma_jumps(1.0, 1.0), locs);
  auto half = make_crm(1, atom(0.2), make_gamma_jumps(0.5, 1.0), locs);

  TruncationPolicy pol;
  pol.eps = 1e-3;
  pol.ref = {1.0};
  Rng base(4450);
  const int n = 12000;
  std::vector<double> merged, direct;
  for (int r = 0; r < n; ++r) {
    Rng ra = base.split(static_cast<std::uint64_t>(r));
    Rng rb = base.split(1000000 + static_cast<std::uint64_t>(r));
    double xa = sample_sequence(half, 1, pol, ra, SequenceMode::integrated).columns[0][0];
    double xb = sample_sequence(half, 1, pol, rb, SequenceMode::integrated).columns[0][0];
    merged.push_back(std::min(xa, xb));
    Rng rf = base.split(2000000 + static_cast<std::uint64_t>(r));
    direct.push_back(sample_sequence(full, 1, pol, rf, SequenceMode::integrated).columns[0][0]);
  }
  CHECK(two_sample_ks(merged, direct).p > 0.005);
}

TEST_CASE("empirical survival of minid draws reconstructs the measure") {
  auto atoms = std::make_shared<AtomicMeasure>(
      2, std::vector<WeightedAtom>{{1.2, {0.8, 0.6}}});
  auto lines = bundle2(make_lebesgue_line(0.7, 0.0), nullptr);
  auto eta = std::make_shared<SumMeasure>(2, std::vector<MeasurePtr>{atoms, lines});

  Rng base(3303);
  const int n = 100000;
  std::vector<Point> draws;
  draws.reserve(n);
  for (int r = 0; r < n; ++r) {
    Rng rr = base.split(static_cast<std::uint64_t>(r));
    auto [x, prm] = sample_minid_latent(*eta, rr);
    if (r < 1000) check_scenario_shape(extract_hitting_scenario(prm, {x}));
    draws.push_back(std::move(x));
  }
  for (int g = 1; g <= 10; ++g) {
    Point x{0.17 * g, 0.11 * g};
    double s = eta->survival(x);
    int over = 0;
    for (const auto& y : draws) over += (y[0] > x[0] && y[1] > x[1]);
    CHECK(std::fabs(static_cast<double>(over) / n - s) <= 4 * binom_se(s, n) + 1e-12);
  }
}

TEST_CASE("nu atoms keep one identity across columns") {
  LevyCharacteristics ch;
  ch.d = 2;
  auto eta_star = bundle2(make_exponential_hazard_line(1.0), make_exponential_hazard_line(1.0));
  ch.families.push_back(std::make_shared<FiniteMeasureFamily>(
      2, std::vector<std::pair<double, MeasurePtr>>{{3.0, eta_star}}));

  TruncationPolicy pol;
  pol.ref = {1.0, 1.0};
  Rng base(9085);
  int shared_across_columns = 0;
  for (int r = 0; r < 1500; ++r) {
    Rng rr = base.split(static_cast<std::uint64_t>(r));
    auto mode = r % 2 ? SequenceMode::integrated : SequenceMode::conditional;
    auto seq = sample_sequence(ch, 3, pol, rr, mode);
    auto sc = extract_hitting_scenario(seq.latent, seq.columns);
    check_scenario_shape(sc);
    std::size_t parts = std::dynamic_pointer_cast<const SumMeasure>(seq.realized.measure)
                            ->parts()
                            .size();
    CHECK(sc.blocks <= static_cast<int>(parts) - 1); // base part carries nothing
    for (const auto& atom : seq.latent.atoms) {
      int jmin = seq.latent.n, jmax = -1;
      for (const auto& h : atom.hits) {
        jmin = std::min(jmin, h.j);
        jmax = std::max(jmax, h.j);
      }
      if (jmax > jmin) ++shared_across_columns;
    }
  }
  CHECK(shared_across_columns > 0);
}

TEST_CASE("extraction rejects inconsistent latent records") {
  LatentPrm prm;
  prm.d = 1;
  prm.n = 1;
  prm.atoms.push_back({7, false, {{0, 0, 0.5}}});
  CHECK_THROWS_AS(extract_hitting_scenario(prm, {{0.7}}), std::logic_error);

  // Two continuous atoms on one coordinate: the probability-zero collision.
  prm.atoms.push_back({9, false, {{0, 0, 0.5}}});
  CHECK_THROWS_AS(extract_hitting_scenario(prm, {{0.5}}), std::logic_error);

  LatentPrm orphan;
  orphan.d = 1;
  orphan.n = 1;
  CHECK_THROWS_AS(extract_hitting_scenario(orphan, {{0.5}}), std::logic_error);

  LatentPrm at_inf;
  at_inf.d = 1;
  at_inf.n = 1;
  at_inf.atoms.push_back({3, false, {{0, 0, kInf}}});
  CHECK_THROWS_AS(extract_hitting_scenario(at_inf, {{kInf}}), std::logic_error);

  LevyCharacteristics ch;
  ch.d = 1;
  TruncationPolicy pol;
  Rng rng(1);
  CHECK_THROWS_AS(sample_sequence(ch, 0, pol, rng, SequenceMode::conditional),
                  std::invalid_argument);
}
