#pragma once

#include <boost/dynamic_bitset.hpp>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "haarfactor/arith.hpp"

namespace hf {

inline std::int64_t pow2ll(int k) { return std::int64_t(1) << k; }

// Number of dyadic intervals of level <= depth, i.e. nodes of the full
// binary tree with `depth + 1` levels.
inline std::int64_t tree_size(int depth) { return pow2ll(depth + 1) - 1; }

// Half-open interval [(position-1) 2^{-level}, position 2^{-level}) with
// level >= 0 and 1 <= position <= 2^level.
struct DyadicInterval {
  int level = 0;
  std::int64_t position = 1;

  bool valid() const {
    return level >= 0 && position >= 1 && position <= pow2ll(level);
  }
  double measure() const;
  std::int64_t order() const { return pow2ll(level) - 1 + position; }

  DyadicInterval parent() const;
  DyadicInterval child(bool right) const;
  DyadicInterval half(bool right) const { return child(right); }
  DyadicInterval ancestor_at(int lvl) const;   // requires lvl <= level
  bool is_right_child() const { return position % 2 == 0; }

  bool contains(const DyadicInterval& other) const;   // other subset of this
  bool disjoint(const DyadicInterval& other) const;

  std::int64_t first_leaf(int resolution) const;      // 0-based, resolution >= level
  std::int64_t leaf_count(int resolution) const;

  std::string str() const;
  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

// Breadth-first enumeration of the dyadic tree, starting at 1 for [0,1).
std::int64_t order_of(const DyadicInterval& I);
DyadicInterval interval_from_order(std::int64_t order);

// Subset of the 2^resolution level-`resolution` intervals ("leaves"), with
// exact counting measure. Set operations require equal resolutions.
class LeafSet {
public:
  LeafSet() : bits_(1) {}
  explicit LeafSet(int resolution);
  static LeafSet from_interval(const DyadicInterval& I, int resolution);
  static LeafSet full(int resolution);

  int resolution() const { return resolution_; }
  std::int64_t count() const { return static_cast<std::int64_t>(bits_.count()); }
  double measure() const;
  bool empty() const { return bits_.none(); }

  bool test(std::int64_t leaf) const { return bits_.test(static_cast<std::size_t>(leaf)); }
  void set(std::int64_t leaf, bool value = true) { bits_.set(static_cast<std::size_t>(leaf), value); }
  void add_interval(const DyadicInterval& I);

  LeafSet refined(int new_resolution) const;
  LeafSet union_with(const LeafSet& o) const;
  LeafSet intersect(const LeafSet& o) const;
  LeafSet difference(const LeafSet& o) const;
  LeafSet complement() const;

  bool subset_of(const LeafSet& o) const;
  bool disjoint_with(const LeafSet& o) const;
  std::int64_t intersect_count(const LeafSet& o) const;
  bool operator==(const LeafSet& o) const {
    return resolution_ == o.resolution_ && bits_ == o.bits_;
  }

  std::int64_t first_leaf() const;  // -1 when empty
  std::vector<std::int64_t> leaves() const;
  const boost::dynamic_bitset<>& bits() const { return bits_; }

private:
  int resolution_ = 0;
  boost::dynamic_bitset<> bits_;
  void require_same(const LeafSet& o) const;
};

// Finite set of dyadic intervals kept sorted by order with no duplicates.
struct IntervalCollection {
  std::vector<DyadicInterval> items;

  void insert(const DyadicInterval& I);
  bool contains(const DyadicInterval& I) const;
  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  int max_level() const;
  bool members_pairwise_disjoint() const;
  LeafSet point_set(int resolution) const;
  std::int64_t point_count(int resolution) const;
  friend bool operator==(const IntervalCollection&, const IntervalCollection&) = default;
};

// Family of measurable sets at a fixed resolution. Order of `sets` is the
// identity of members; duplicates are allowed and kept.
struct NestedFamily {
  int resolution = 0;
  std::vector<LeafSet> sets;

  std::size_t size() const { return sets.size(); }
  bool empty() const { return sets.empty(); }
};

// True when every pair of members is nested or disjoint.
bool is_nested(const NestedFamily& X);

// Generations: generation 0 holds the members with no strict superset in
// the family; generation k+1 repeats that after removing generations <= k.
// Equal members always land in the same generation.
std::vector<std::vector<std::size_t>> generation_indices(const NestedFamily& X);
LeafSet generation_point_set(const NestedFamily& X, const std::vector<std::size_t>& gen);

// Carleson constant sup_N |N|^{-1} sum_{M subset N} |M| as an exact ratio of
// leaf counts. Empty family gives 0/1.
struct CarlesonValue {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value = 0.0;
  std::optional<std::size_t> witness;

  // Exact test  num/den > k / rho  (rho a positive double).
  bool exceeds(std::int64_t k, double rho) const;
};
CarlesonValue carleson_constant_exact(const NestedFamily& X);
double carleson_constant(const NestedFamily& X);

}  // namespace hf
