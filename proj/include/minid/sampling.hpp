#pragma once

// Exchangeable min-id sequences and their latent Poisson structure.  A draw
// from minid(eta) is a componentwise minimum over PRM atoms; recording which
// atom realized each finite coordinate is what makes hitting scenarios (the
// partition of observed indices by shared atom) extractable afterwards.

#include <cstdint>
#include <utility>
#include <vector>

#include "minid/levy.hpp"
#include "minid/partitions.hpp"

namespace minid {

// One coordinate produced by an atom: component i of column j took `value`.
struct LatentHit {
  int i;
  int j;
  double value;
};

// A realized atom of the driving PRM, restricted to the coordinates it won.
// Keys agree exactly when two coordinates descend from the same atom: nu
// atoms keep one key across all columns (each column folds in an independent
// draw of that atom), base-measure points are scoped to their column.  exact
// marks atoms carrying exact location values; value ties between two such
// atoms are legitimate and resolve toward the smaller key at sampling time.
struct LatentAtom {
  std::int64_t key;
  bool exact;
  std::vector<LatentHit> hits;
};

struct LatentPrm {
  int d = 0;
  int n = 0;
  std::vector<LatentAtom> atoms;
};

// Partition of the finite coordinates of a sample by generating atom, in
// canonical restricted-growth form over index_set order (j outer, i inner).
// Infinite coordinates have no generating atom and are left out.
struct HittingScenario {
  std::vector<std::pair<int, int>> index_set; // (i, j) of every finite entry
  Rgs assignment;
  int blocks = 0;
};

enum class SequenceMode { conditional, integrated };

struct SequenceSample {
  std::vector<Point> columns; // n column draws, each of dimension d
  RealizedIdem realized;      // truncated atom record shared by both modes
  LatentPrm latent;
};

// One minid(eta) draw with its latent atoms; keys are eta's source ids.
std::pair<Point, LatentPrm> sample_minid_latent(const ExponentMeasure& eta, Rng& rng);

// n exchangeable columns driven by one realized IDEM.  conditional draws the
// columns sequentially from the summed measure's stream; integrated folds the
// per-atom draws with one substream per column, so any column is reproducible
// on its own.  The modes agree in distribution.
SequenceSample sample_sequence(const LevyCharacteristics& chars, int n,
                               const TruncationPolicy& pol, Rng& rng, SequenceMode mode);

// Group the finite coordinates of x by generating atom.  Throws logic_error
// when the latent record does not reproduce x, and when two distinct atoms
// claim one coordinate without both carrying exact locations (a
// probability-zero event under continuous margins; it signals a bookkeeping
// or stream-collision bug).
HittingScenario extract_hitting_scenario(const LatentPrm& latent, const std::vector<Point>& x);

} // namespace minid
