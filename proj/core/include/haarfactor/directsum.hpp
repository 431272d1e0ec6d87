#pragma once

#include <optional>
#include <vector>

#include "haarfactor/haar.hpp"

namespace hf {

// Finite direct sum: one coefficient vector per depth 0..M, combined in the
// l^r sense (r = infinity allowed, and the interesting case).
struct DirectSumVector {
  int M = 0;
  double r = std::numeric_limits<double>::infinity();
  std::vector<HaarVector> blocks;   // blocks[k].depth == k

  static DirectSumVector zero(int M, double r);
  bool well_formed() const;
};

double dsum_norm(const DirectSumVector& x);
double dsum_norm(const DirectSumVector& x, double r);

// The n-th gap [1 - 2^{-n}, 1 - 2^{-n-1}), a level n+1 interval. The gaps
// tile [0,1) and each one carries a full scaled copy of the dyadic tree.
DyadicInterval gap_interval(int n);

// The n with I inside gap n, if any.
std::optional<int> gap_of(const DyadicInterval& I);

// Coordinates of block n land inside gap n: level l goes to level l+n+1.
DyadicInterval embed_interval(const DyadicInterval& I, int n);

// Isometric (for r = infinity) embedding of the direct sum into one tree.
// Default target depth 2M+1 is the smallest that fits every block.
HaarVector embed_sum(const DirectSumVector& x, int target_depth = -1);

// Coefficient restriction onto the union of the gaps.
HaarVector gap_projection(const HaarVector& f);

// Block n = truncation of f to depth n; together with last_block this splits
// and reassembles exactly.
DirectSumVector split_blocks(const HaarVector& f);
HaarVector last_block(const DirectSumVector& x);

}  // namespace hf
