#include "minid/moments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

#include "minid/partitions.hpp"
#include "minid/quadrature.hpp"

namespace minid {

namespace {

void check_points(const LevyCharacteristics& chars, const std::vector<Point>& pts) {
  if (pts.empty()) throw std::invalid_argument("need at least one probe point");
  for (const auto& x : pts)
    if (static_cast<int>(x.size()) != chars.d)
      throw std::invalid_argument("probe point dimension mismatch");
}

// CRM atoms factor as a delta_b, so the family exponent is a sum over
// coverage cells of the location space: cell mass times phi at the cell's
// total weight.  Closed-form phi turns every transform evaluation into a
// handful of orthant masses, which the difference ladders and the nested
// mean-functional integrals lean on hard.
double crm_exponent(const CrmFamily& fam, const std::vector<Point>& pts,
                    const std::vector<double>& z) {
  const std::size_t m = pts.size(), full = std::size_t{1} << m;
  const std::size_t d = static_cast<std::size_t>(fam.dim());
  const JumpDensity& rho = fam.jumps();
  auto psi = [&](double s) -> double {
    if (s == 0) return 0.0;
    if (rho.phi && (s > 0 || -s < rho.exp_rate)) return rho.phi(s);
    auto q = integrate_semi(
        [&](double a) {
          double dens = rho.dens(a);
          return dens == 0 ? 0.0 : dens * -std::expm1(-s * a);
        },
        0.0, 1e-9, 1e-13, 400);
    if (!q.converged)
      throw std::runtime_error("Laplace exponent did not stabilize for " + fam.describe());
    return q.value;
  };

  // G(intersection of C_i, i in T) by inclusion-exclusion over the joined
  // orthants; infinite location totals cancel out of the alternating sum.
  std::vector<double> omj(full, 0.0), g(full, 0.0);
  for (std::size_t u = 1; u < full; ++u) {
    Point join(d, -kInf);
    for (std::size_t i = 0; i < m; ++i)
      if (u >> i & 1)
        for (std::size_t c = 0; c < d; ++c) join[c] = std::max(join[c], pts[i][c]);
    omj[u] = fam.locations()->orthant_mass(join);
  }
  for (std::size_t t = 1; t < full; ++t)
    for (std::size_t u = t; u; u = (u - 1) & t)
      g[t] += (std::popcount(u) % 2 ? 1.0 : -1.0) * omj[u];

  // Moebius step: mass covered by exactly the probes in s.
  double acc = 0;
  for (std::size_t s = 1; s < full; ++s) {
    double cell = 0;
    std::size_t comp = (full - 1) & ~s;
    for (std::size_t r = comp;; r = (r - 1) & comp) {
      cell += (std::popcount(r) % 2 ? -1.0 : 1.0) * g[s | r];
      if (r == 0) break;
    }
    if (cell == 0) continue;
    double w = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (s >> i & 1) w += z[i];
    acc += cell * psi(w);
  }
  return acc;
}

// -log L(z): base term plus one PRM exponent per family.
double laplace_exponent(const LevyCharacteristics& chars, const std::vector<Point>& pts,
                        const std::vector<double>& z) {
  double acc = 0;
  if (chars.base && !is_zero(*chars.base))
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (z[i] != 0) acc += z[i] * chars.base->orthant_mass(pts[i]);
  for (const auto& fam : chars.families) {
    if (auto crm = dynamic_cast<const CrmFamily*>(fam.get()); crm && pts.size() <= 8) {
      acc += crm_exponent(*crm, pts, z);
      continue;
    }
    bool ok = true;
    acc += fam->integrate(
        [&](const ExponentMeasure& eta) {
          double s = 0;
          for (std::size_t i = 0; i < pts.size(); ++i)
            if (z[i] != 0) s += z[i] * eta.orthant_mass(pts[i]);
          return -std::expm1(-s);
        },
        &ok);
    if (!ok)
      throw std::runtime_error("Laplace exponent did not stabilize for " + fam->describe());
  }
  return acc;
}

// Central-difference stencils of O(h^2) for derivative orders 1..4.
struct Stencil {
  std::vector<int> off;
  std::vector<double> coef;
};

const Stencil& stencil(int order) {
  static const std::vector<Stencil> table = {
      {{-1, 1}, {-0.5, 0.5}},
      {{-1, 0, 1}, {1, -2, 1}},
      {{-2, -1, 1, 2}, {-0.5, 1, -1, 0.5}},
      {{-2, -1, 0, 1, 2}, {1, -4, 6, -4, 1}},
  };
  return table[static_cast<std::size_t>(order - 1)];
}

// Tensor-product stencil for the mixed partial of L at z = 0, step h.
double fd_mixed(const LevyCharacteristics& chars, const std::vector<Point>& pts,
                const std::vector<int>& orders, double h) {
  std::size_t m = pts.size();
  int q = 0;
  for (int j : orders) q += j;
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> z(m);
  double acc = 0;
  for (;;) {
    double w = 1;
    for (std::size_t i = 0; i < m; ++i) {
      const Stencil& st = stencil(orders[i]);
      w *= st.coef[idx[i]];
      z[i] = st.off[idx[i]] * h;
    }
    acc += w * std::exp(-laplace_exponent(chars, pts, z));
    std::size_t k = 0;
    while (k < m && ++idx[k] == stencil(orders[k]).off.size()) idx[k++] = 0;
    if (k == m) break;
  }
  return acc / std::pow(h, q);
}

// Joint cumulant of (mu(C_i)) over one block of probe multiplicities: alpha
// contributes to singletons only, every family adds its product functional.
std::optional<double> block_cumulant(const LevyCharacteristics& chars,
                                     const std::vector<Point>& pts,
                                     const std::vector<int>& mult) {
  std::vector<Point> u;
  std::vector<int> act;
  int q = 0;
  for (std::size_t i = 0; i < mult.size(); ++i) {
    if (mult[i] == 0) continue;
    u.push_back(pts[i]);
    act.push_back(mult[i]);
    q += mult[i];
  }
  double acc = 0;
  if (q == 1 && chars.base && !is_zero(*chars.base)) acc += chars.base->orthant_mass(u[0]);
  for (const auto& fam : chars.families) {
    auto v = fam->product_mass_functional(u, act);
    if (!v) return std::nullopt;
    acc += *v;
  }
  return acc;
}

// Panel sweep of int_0^inf g: geometric panels until three consecutive
// contributions fall below the decay floor.  A tail that keeps mass forever
// is a divergent integral here, not a tolerance problem.
double tail_sweep(const std::function<double(double)>& g) {
  const double floor_ = 1e-10;
  double lo = 0, width = 1, acc = 0;
  int quiet = 0;
  for (int panel = 0; panel < 64; ++panel) {
    // The integrand inherits ~1e-7 relative noise from the family
    // quadratures, so asking the panels for more would never stabilize.
    auto q = integrate(g, lo, lo + width, 1e-6, 1e-12, 200);
    if (!q.converged) throw std::runtime_error("mean-functional panel did not converge");
    acc += q.value;
    quiet = std::fabs(q.value) < floor_ ? quiet + 1 : 0;
    if (quiet >= 3) return acc;
    lo += width;
    if (panel >= 1) width *= 2;
  }
  throw std::runtime_error("mean-functional tail failed to decay");
}

std::pair<double, double> cov_se(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < n; ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cov = 0, m2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double p = (a[k] - ma) * (b[k] - mb);
    cov += p;
    m2 += p * p;
  }
  cov /= static_cast<double>(n - 1);
  double var_p = m2 / static_cast<double>(n) - cov * cov * (n - 1.0) * (n - 1.0) / (n * n);
  return {cov, std::sqrt(std::max(var_p, 0.0) / static_cast<double>(n))};
}

bool survives(const Point& x, const Point& u) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != kInf && !(x[i] > u[i])) return false;
  return true;
}

} // namespace

double laplace_transform(const LevyCharacteristics& chars, const LaplaceQuery& q) {
  check_points(chars, q.points);
  if (q.weights.size() != q.points.size())
    throw std::invalid_argument("need one weight per probe point");
  double s_neg = 0;
  for (double z : q.weights) s_neg += std::max(0.0, -z);
  if (s_neg > 0)
    for (const auto& fam : chars.families)
      if (!fam->exponential_moment(s_neg))
        throw std::domain_error("negative weights need an exponential-moment certificate: " +
                                fam->describe());
  return std::exp(-laplace_exponent(chars, q.points, q.weights));
}

HazardMomentResult hazard_moments(const LevyCharacteristics& chars,
                                  const std::vector<Point>& points,
                                  const std::vector<int>& orders) {
  check_points(chars, points);
  if (orders.size() != points.size())
    throw std::invalid_argument("need one order per probe point");
  int q = 0;
  for (int j : orders) {
    if (j < 1) throw std::invalid_argument("moment orders must be >= 1");
    q += j;
  }
  if (q > 4) throw std::invalid_argument("total moment order is capped at 4");

  // One item per unit of order; partitions of the items drive the exact
  // moment-from-cumulant assembly.
  std::vector<int> item;
  for (std::size_t i = 0; i < orders.size(); ++i)
    for (int j = 0; j < orders[i]; ++j) item.push_back(static_cast<int>(i));

  std::map<std::vector<int>, double> kappa;
  bool exact = true, divergent = false;
  for_each_partition(q, [&](const Rgs& r) {
    if (!exact) return;
    int nb = block_count(r);
    for (int b = 0; b < nb; ++b) {
      std::vector<int> mult(points.size(), 0);
      for (int k = 0; k < q; ++k)
        if (r[static_cast<std::size_t>(k)] == b) ++mult[static_cast<std::size_t>(item[k])];
      if (kappa.count(mult)) continue;
      auto v = block_cumulant(chars, points, mult);
      if (!v) {
        exact = false;
        return;
      }
      if (*v == kInf) divergent = true;
      kappa.emplace(std::move(mult), *v);
    }
  });

  if (exact) {
    if (divergent) return {kInf, 0, true};
    double total = 0;
    for_each_partition(q, [&](const Rgs& r) {
      int nb = block_count(r);
      double term = 1;
      for (int b = 0; b < nb; ++b) {
        std::vector<int> mult(points.size(), 0);
        for (int k = 0; k < q; ++k)
          if (r[static_cast<std::size_t>(k)] == b) ++mult[static_cast<std::size_t>(item[k])];
        term *= kappa.at(mult);
      }
      total += term;
    });
    return {total, 0, true};
  }

  // Richardson ladder over h, h/2, h/4 on the O(h^2) stencil.
  const double h = 1e-3;
  double d1 = fd_mixed(chars, points, orders, h);
  double d2 = fd_mixed(chars, points, orders, h / 2);
  double d4 = fd_mixed(chars, points, orders, h / 4);
  double r01 = (4 * d2 - d1) / 3, r11 = (4 * d4 - d2) / 3;
  double r2 = (16 * r11 - r01) / 15;
  double value = (q % 2 ? -1.0 : 1.0) * r2;
  double err = std::fabs(r2 - r11);
  if (err > 5e-3 * std::max(std::fabs(r2), 1e-8))
    throw std::runtime_error("moment differentiation is unstable: Richardson levels disagree");
  return {value, err, false};
}

MonotoneFn identity_fn() {
  MonotoneFn f;
  f.name = "id";
  f.fwd = [](double t) { return t; };
  f.inv = [](double t) { return t; };
  f.certified = true;
  return f;
}

double mean_functional_moment(const LevyCharacteristics& chars, const MonotoneFn& f, int m) {
  if (chars.d != 1) throw std::invalid_argument("mean functionals are univariate");
  if (m < 1 || m > 3) throw std::invalid_argument("mean-functional order must be 1..3");
  if (!f.certified)
    throw std::invalid_argument("mean functional needs a certified monotone map");
  std::vector<Point> pts(static_cast<std::size_t>(m), Point{0.0});
  std::vector<double> ones(static_cast<std::size_t>(m), 1.0);
  std::function<double(int)> level = [&](int k) -> double {
    if (k == m) return std::exp(-laplace_exponent(chars, pts, ones));
    return tail_sweep([&](double t) {
      pts[static_cast<std::size_t>(k)][0] = f.inv(t);
      return level(k + 1);
    });
  };
  return level(0);
}

AssociationReport association_diagnostic(const LevyCharacteristics& chars,
                                         const std::vector<std::pair<Point, Point>>& pairs,
                                         int n_draws, const TruncationPolicy& pol, Rng& rng) {
  if (n_draws < 2) throw std::invalid_argument("association diagnostic needs draws");
  for (const auto& [x1, x2] : pairs) {
    if (static_cast<int>(x1.size()) != chars.d || static_cast<int>(x2.size()) != chars.d)
      throw std::invalid_argument("pair point dimension mismatch");
  }
  std::size_t np = pairs.size();
  std::vector<std::vector<double>> sa(np), sb(np), ea(np), eb(np);
  for (int r = 0; r < n_draws; ++r) {
    Rng sub = rng.split(static_cast<std::uint64_t>(r));
    auto real = sample_idem(chars, pol, sub);
    Point x = real.measure->sample_minid(sub);
    for (std::size_t p = 0; p < np; ++p) {
      sa[p].push_back(std::exp(-real.measure->orthant_mass(pairs[p].first)));
      sb[p].push_back(std::exp(-real.measure->orthant_mass(pairs[p].second)));
      ea[p].push_back(survives(x, pairs[p].first) ? 1.0 : 0.0);
      eb[p].push_back(survives(x, pairs[p].second) ? 1.0 : 0.0);
    }
  }
  AssociationReport rep;
  for (std::size_t p = 0; p < np; ++p) {
    PairAssociation pa;
    std::tie(pa.cov_surv, pa.se_surv) = cov_se(sa[p], sb[p]);
    std::tie(pa.cov_event, pa.se_event) = cov_se(ea[p], eb[p]);
    // The dust floor keeps a degenerate (deterministic) statistic from
    // flagging on rounding noise alone.
    const double dust = 1e-12;
    pa.fail = pa.cov_surv < -(3 * pa.se_surv + dust) || pa.cov_event < -(3 * pa.se_event + dust);
    rep.pass = rep.pass && !pa.fail;
    rep.pairs.push_back(pa);
  }
  return rep;
}

} // namespace minid
