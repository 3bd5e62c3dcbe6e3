#include "minid/transforms.hpp"

#include <cmath>
#include <stdexcept>

namespace minid {

double MonotoneMap::inverse(int i, double t) const {
  if (t == kInf) return kInf;
  if (i < static_cast<int>(inv.size()) && inv[i]) return inv[i](t);
  // inf{s : g(s) >= t} by bracketed bisection.
  const auto& g = fwd[i];
  double lo = -1, hi = 1;
  while (g(lo) >= t) {
    lo *= 2;
    if (lo < -1e290) return -kInf; // never attained; measure has no mass there
  }
  while (g(hi) < t) {
    hi = 2 * hi + 1;
    if (hi > 1e290) return kInf;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) >= t) hi = mid;
    else lo = mid;
  }
  return hi;
}

namespace {

void require_certificate(const MonotoneMap& g, int d) {
  if (!g.certified_monotone)
    throw std::invalid_argument("image_transform requires the monotone certificate");
  if (static_cast<int>(g.fwd.size()) != d)
    throw std::invalid_argument("map must provide one component per coordinate");
  for (const auto& f : g.fwd)
    if (!f) throw std::invalid_argument("map components must be callable");
}

// Generic pushforward: orthant masses through the inverse point, sampling by
// mapping draws.  Keeps the base support tag.
class ImageMeasure : public ExponentMeasure {
 public:
  ImageMeasure(MeasurePtr base, MonotoneMap g) : base_(std::move(base)), g_(std::move(g)) {}

  int dim() const override { return base_->dim(); }
  double orthant_mass(const Point& x) const override {
    return base_->orthant_mass(pullback(x));
  }
  double lower_orthant_mass(const Point& x) const override {
    return base_->lower_orthant_mass(pullback(x));
  }
  double total_mass() const override { return base_->total_mass(); }
  Support support_tag() const override { return base_->support_tag(); }
  bool can_sample() const override { return base_->can_sample(); }
  Point sample_minid(Rng& rng, SourceIds* src) const override {
    Point x = base_->sample_minid(rng, src);
    for (int i = 0; i < dim(); ++i) x[i] = g_.apply(i, x[i]);
    return x;
  }

 private:
  Point pullback(const Point& x) const {
    Point y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = g_.inverse(static_cast<int>(i), x[i]);
    return y;
  }
  MeasurePtr base_;
  MonotoneMap g_;
};

} // namespace

MeasurePtr image_transform(MeasurePtr eta, const MonotoneMap& g) {
  require_certificate(g, eta->dim());
  // Atomic measures map exactly to atomic measures.
  if (auto atomic = std::dynamic_pointer_cast<const AtomicMeasure>(eta)) {
    std::vector<WeightedAtom> out;
    out.reserve(atomic->atoms().size());
    for (const auto& a : atomic->atoms()) {
      Point loc(a.loc.size());
      for (std::size_t i = 0; i < loc.size(); ++i) loc[i] = g.apply(static_cast<int>(i), a.loc[i]);
      out.push_back({a.w, std::move(loc)});
    }
    return std::make_shared<AtomicMeasure>(atomic->dim(), std::move(out));
  }
  return std::make_shared<ImageMeasure>(std::move(eta), g);
}

MeasurePtr reweight(MeasurePtr eta, std::function<double(const Point&)> g) {
  if (!g) throw std::invalid_argument("reweight needs a weight function");
  const int d = eta->dim();
  auto checked = [g, d](const Point& x) {
    double v = g(x);
    if (!(v >= 0)) throw std::invalid_argument("reweight: negative weight detected");
    return v;
  };
  if (auto atomic = std::dynamic_pointer_cast<const AtomicMeasure>(eta)) {
    std::vector<WeightedAtom> out;
    out.reserve(atomic->atoms().size());
    for (const auto& a : atomic->atoms()) out.push_back({a.w * checked(a.loc), a.loc});
    return std::make_shared<AtomicMeasure>(d, std::move(out));
  }
  if (auto bundle = std::dynamic_pointer_cast<const LineBundleMeasure>(eta)) {
    std::vector<LinePtr> lines(d);
    for (int i = 0; i < d; ++i) {
      const LinePtr& base = bundle->line(i);
      if (!base) continue;
      if (!base->has_density())
        throw std::invalid_argument("reweight needs line densities or atoms");
      double lo = base->support_lo();
      if (!(lo > -kInf))
        throw std::invalid_argument("reweight of a line unbounded below is not supported");
      lines[i] = std::make_shared<QuadLine>(
          [base, checked, i, d](double t) {
            Point x(d, kInf);
            x[i] = t;
            return base->density(t) * checked(x);
          },
          lo);
    }
    return std::make_shared<LineBundleMeasure>(d, std::move(lines));
  }
  throw std::invalid_argument("reweight supports atomic and line-density measures");
}

MeasurePtr smooth(MeasurePtr eta, MeasurePtr beta) {
  if (eta->dim() != beta->dim()) throw std::invalid_argument("smooth: dimension mismatch");
  const int d = eta->dim();
  if (auto atomic = std::dynamic_pointer_cast<const AtomicMeasure>(beta)) {
    std::vector<WeightedAtom> out;
    for (const auto& a : atomic->atoms()) {
      double w = a.w * eta->lower_orthant_mass(a.loc);
      out.push_back({w, a.loc});
    }
    return std::make_shared<AtomicMeasure>(d, std::move(out));
  }
  if (auto bundle = std::dynamic_pointer_cast<const LineBundleMeasure>(beta)) {
    std::vector<LinePtr> lines(d);
    for (int i = 0; i < d; ++i) {
      const LinePtr& base = bundle->line(i);
      if (!base) continue;
      if (!base->has_density())
        throw std::invalid_argument("smooth needs a density for the smoothing measure");
      double lo = base->support_lo();
      if (!(lo > -kInf))
        throw std::invalid_argument("smoothing lines unbounded below are not supported");
      MeasurePtr eta_shared = eta;
      lines[i] = std::make_shared<QuadLine>(
          [eta_shared, base, i, d](double t) {
            Point x(d, kInf);
            x[i] = t;
            return eta_shared->lower_orthant_mass(x) * base->density(t);
          },
          lo);
    }
    return std::make_shared<LineBundleMeasure>(d, std::move(lines));
  }
  throw std::invalid_argument("smooth supports atomic and line-density smoothing measures");
}

} // namespace minid
