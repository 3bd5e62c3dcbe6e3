#include "minid/sampling.hpp"

#include <map>
#include <stdexcept>

namespace minid {

namespace {

constexpr int kPartShift = 24;
constexpr int kColumnShift = 40;

// Sequence-atom identity of one internal point, by part kind.
std::int64_t atom_key(PartKind kind, std::size_t part, std::int64_t inner, int column) {
  std::int64_t base = static_cast<std::int64_t>(part) << kPartShift;
  switch (kind) {
    case PartKind::alpha:
      return (static_cast<std::int64_t>(column + 1) << kColumnShift) | base | inner;
    case PartKind::nu_atom:
      return base; // the whole part is one atom
    case PartKind::nu_atom_list:
      return base | inner;
  }
  throw std::logic_error("unknown part kind");
}

struct Winner {
  std::int64_t key;
  bool exact;
};

} // namespace

std::pair<Point, LatentPrm> sample_minid_latent(const ExponentMeasure& eta, Rng& rng) {
  SourceIds src;
  Point x = eta.sample_minid(rng, &src);
  LatentPrm prm;
  prm.d = eta.dim();
  prm.n = 1;
  bool exact = eta.support_tag() == ExponentMeasure::Support::atoms;
  std::map<std::int64_t, std::size_t> slot;
  for (int i = 0; i < prm.d; ++i) {
    std::int64_t id = src[static_cast<std::size_t>(i)];
    if (id < 0) continue;
    auto [it, fresh] = slot.try_emplace(id, prm.atoms.size());
    if (fresh) prm.atoms.push_back({id, exact, {}});
    prm.atoms[it->second].hits.push_back({i, 0, x[static_cast<std::size_t>(i)]});
  }
  return {std::move(x), std::move(prm)};
}

SequenceSample sample_sequence(const LevyCharacteristics& chars, int n,
                               const TruncationPolicy& pol, Rng& rng, SequenceMode mode) {
  if (n < 1) throw std::invalid_argument("need at least one column");
  SequenceSample out;
  out.realized = sample_idem(chars, pol, rng);
  const auto& sum = dynamic_cast<const SumMeasure&>(*out.realized.measure);
  const auto& parts = sum.parts();
  const int d = chars.d;

  out.latent.d = d;
  out.latent.n = n;
  std::map<std::int64_t, std::size_t> slot;
  auto record = [&](const Winner& w, int i, int j, double v) {
    auto [it, fresh] = slot.try_emplace(w.key, out.latent.atoms.size());
    if (fresh) out.latent.atoms.push_back({w.key, w.exact, {}});
    out.latent.atoms[it->second].hits.push_back({i, j, v});
  };

  Rng lanes = rng.split(0x636f6c73); // private lane for column substreams
  out.columns.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    Rng sub = lanes.split(static_cast<std::uint64_t>(j));
    Rng& use = mode == SequenceMode::integrated ? sub : rng;
    Point x(static_cast<std::size_t>(d), kInf);
    std::vector<std::vector<Winner>> win(static_cast<std::size_t>(d));
    for (std::size_t p = 0; p < parts.size(); ++p) {
      if (is_zero(*parts[p])) continue;
      SourceIds src;
      Point y = parts[p]->sample_minid(use, &src);
      bool exact = parts[p]->support_tag() == ExponentMeasure::Support::atoms;
      for (int i = 0; i < d; ++i) {
        double v = y[static_cast<std::size_t>(i)];
        if (v == kInf) continue;
        Winner w{atom_key(out.realized.parts[p], p, src[static_cast<std::size_t>(i)], j),
                 exact};
        auto& ws = win[static_cast<std::size_t>(i)];
        if (v < x[static_cast<std::size_t>(i)]) {
          x[static_cast<std::size_t>(i)] = v;
          ws.assign(1, w);
        } else if (v == x[static_cast<std::size_t>(i)]) {
          // Equal values from two exact atom lists are a fair coincidence of
          // locations; anything else is kept for extraction to reject.
          if (w.exact && ws.size() == 1 && ws[0].exact)
            ws[0].key = std::min(ws[0].key, w.key);
          else
            ws.push_back(w);
        }
      }
    }
    for (int i = 0; i < d; ++i)
      for (const auto& w : win[static_cast<std::size_t>(i)])
        record(w, i, j, x[static_cast<std::size_t>(i)]);
    out.columns.push_back(std::move(x));
  }
  return out;
}

HittingScenario extract_hitting_scenario(const LatentPrm& latent, const std::vector<Point>& x) {
  const int d = latent.d, n = latent.n;
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("column count mismatch");
  for (const auto& col : x)
    if (static_cast<int>(col.size()) != d) throw std::invalid_argument("column dimension mismatch");

  std::vector<std::vector<std::int64_t>> key(
      static_cast<std::size_t>(n), std::vector<std::int64_t>(static_cast<std::size_t>(d), -1));
  for (const auto& atom : latent.atoms) {
    for (const auto& h : atom.hits) {
      if (h.i < 0 || h.i >= d || h.j < 0 || h.j >= n)
        throw std::invalid_argument("latent hit out of range");
      if (x[static_cast<std::size_t>(h.j)][static_cast<std::size_t>(h.i)] != h.value)
        throw std::logic_error("latent record does not reproduce the sample");
      auto& k = key[static_cast<std::size_t>(h.j)][static_cast<std::size_t>(h.i)];
      if (k >= 0 && k != atom.key)
        throw std::logic_error("two atoms claim one coordinate: ambiguous hitting scenario");
      k = atom.key;
    }
  }

  HittingScenario out;
  std::vector<int> raw;
  std::map<std::int64_t, int> label;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < d; ++i) {
      std::int64_t k = key[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      bool finite = x[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] != kInf;
      if (k < 0) {
        if (finite) throw std::logic_error("finite coordinate with no generating atom");
        continue;
      }
      if (!finite) throw std::logic_error("latent record hits an infinite coordinate");
      out.index_set.emplace_back(i, j);
      raw.push_back(label.try_emplace(k, static_cast<int>(label.size())).first->second);
    }
  }
  out.assignment = canonicalize(raw);
  out.blocks = block_count(out.assignment);
  return out;
}

} // namespace minid
