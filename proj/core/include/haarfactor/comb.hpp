#pragma once

#include <cstdint>
#include <vector>

#include "haarfactor/haar.hpp"

namespace hf {

// Weight omega(K) >= 0 on every dyadic interval of level <= depth. The
// relative weights omega(K)/|K| are kept as exact dyadic numbers so the
// threshold tests below never round.
struct FrequencyWeight {
  int depth = 0;
  std::vector<double> omega;   // omega(K), order indexed
  std::vector<Dyadic> rel;     // omega(K) / |K|

  FrequencyWeight() = default;
  explicit FrequencyWeight(int d);
  static FrequencyWeight from_values(int depth, const std::vector<double>& omega);

  double at(const DyadicInterval& K) const { return omega[K.order() - 1]; }
};

// omega(K) = sum_j |pairing(f_j, h_K)| + |pairing(h_K, g_j)|.
FrequencyWeight frequency_weight(const std::vector<HaarVector>& fs,
                                 const std::vector<HaarVector>& gs, int depth);

struct LevelCover {
  int k = 0;                    // chosen level
  IntervalCollection good;      // the K of level k inside K0 with omega(K) <= tau |K|
  double coverage = 0.0;        // measure of the union, relative to |K0|
};

// Smallest level k in [r, level_cap] whose light intervals inside K0 cover at
// least a (1 - rho) fraction of K0. Coverage comparisons are exact. Throws a
// StructuredFailure carrying the best level and coverage seen if no level in
// the window qualifies. Requires 2^{-r} <= |K0|.
LevelCover select_level_cover(const DyadicInterval& K0, const FrequencyWeight& w,
                              double tau, double rho, int r, int level_cap);

// Hypothesis bookkeeping for the level selection: the window size that makes
// selection unconditional is floor(4 / (rho^2 tau^2)) levels past r.
std::int64_t cover_window_size(double rho, double tau);

struct DenseRootPick {
  std::size_t index = 0;       // member of X acting as the root
  std::int64_t num = 0;        // min over generations 0..k of the exact
  std::int64_t den = 1;        // generation density |G_l| / |root|
  std::vector<double> densities;
};

// Member N0 maximizing the worst generation density of {N in X : N subset
// N0} over generations 0..k. Ties break toward larger measure, then smaller
// first leaf, then lexicographic leaf order.
DenseRootPick best_dense_root(const NestedFamily& X, int k);

// Dense root with the guarantee: requires the Carleson constant of X to
// exceed k/rho, returns a root whose generations 0..k all cover more than a
// (1 - rho) fraction of it. Both tests exact.
struct DenseRootResult {
  std::size_t index = 0;
  LeafSet root;
  NestedFamily under;           // members of X inside the root
  std::vector<double> densities;
};
DenseRootResult find_dense_root(const NestedFamily& X, int k, double rho);

// Pruning of a nested family so generation n becomes an intersection of
// level sets: F_0 is the union of generation n; F_j collects the members of
// generation n-j filled at least (1-beta) by F_0 meet ... meet F_{j-1}; the
// output keeps the collected members meeting all of F_0 .. F_n.
struct PruneResult {
  NestedFamily Y;
  std::vector<std::size_t> picked;        // indices into X
  std::vector<LeafSet> F;                 // F_0 .. F_n point sets
  LeafSet F_intersection;
  bool conclusion_a = false;   // |G_n(Y)| > (1 - alpha 2^{n+1} beta^{-(n+1)}) |G_0(X)|
  bool conclusion_b = false;   // every N in Y has |N meet G_n(Y)| >= (1-beta)|N|
  bool gn_is_intersection = false;
};
PruneResult prune_to_dense(const NestedFamily& X, int n, double alpha, double beta,
                           bool enforce = true);

}  // namespace hf
