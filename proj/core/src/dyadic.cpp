#include "haarfactor/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hf {

double DyadicInterval::measure() const { return std::ldexp(1.0, -level); }

DyadicInterval DyadicInterval::parent() const {
  if (level == 0) throw std::invalid_argument("parent of root interval");
  return DyadicInterval{level - 1, (position + 1) / 2};
}

DyadicInterval DyadicInterval::child(bool right) const {
  return DyadicInterval{level + 1, 2 * position - (right ? 0 : 1)};
}

DyadicInterval DyadicInterval::ancestor_at(int lvl) const {
  if (lvl > level || lvl < 0) throw std::invalid_argument("ancestor_at: bad level");
  int up = level - lvl;
  return DyadicInterval{lvl, ((position - 1) >> up) + 1};
}

bool DyadicInterval::contains(const DyadicInterval& other) const {
  if (other.level < level) return false;
  return other.ancestor_at(level) == *this;
}

bool DyadicInterval::disjoint(const DyadicInterval& other) const {
  return !contains(other) && !other.contains(*this);
}

std::int64_t DyadicInterval::first_leaf(int resolution) const {
  if (resolution < level) throw std::invalid_argument("first_leaf: resolution < level");
  return (position - 1) << (resolution - level);
}

std::int64_t DyadicInterval::leaf_count(int resolution) const {
  if (resolution < level) throw std::invalid_argument("leaf_count: resolution < level");
  return pow2ll(resolution - level);
}

std::string DyadicInterval::str() const {
  std::ostringstream os;
  os << "[" << (position - 1) << "/" << pow2ll(level) << ", " << position << "/"
     << pow2ll(level) << ")";
  return os.str();
}

std::int64_t order_of(const DyadicInterval& I) {
  if (!I.valid()) throw std::invalid_argument("order_of: invalid interval");
  return I.order();
}

DyadicInterval interval_from_order(std::int64_t order) {
  if (order < 1) throw std::invalid_argument("interval_from_order: order < 1");
  int level = 0;
  while (pow2ll(level + 1) - 1 < order) ++level;
  return DyadicInterval{level, order - (pow2ll(level) - 1)};
}

LeafSet::LeafSet(int resolution) : resolution_(resolution) {
  if (resolution < 0 || resolution > 24)
    throw std::invalid_argument("LeafSet: resolution out of range");
  bits_.resize(static_cast<std::size_t>(pow2ll(resolution)));
}

LeafSet LeafSet::from_interval(const DyadicInterval& I, int resolution) {
  LeafSet s(resolution);
  s.add_interval(I);
  return s;
}

LeafSet LeafSet::full(int resolution) {
  LeafSet s(resolution);
  s.bits_.set();
  return s;
}

double LeafSet::measure() const {
  return std::ldexp(static_cast<double>(count()), -resolution_);
}

void LeafSet::add_interval(const DyadicInterval& I) {
  std::int64_t a = I.first_leaf(resolution_);
  std::int64_t n = I.leaf_count(resolution_);
  for (std::int64_t i = 0; i < n; ++i) bits_.set(static_cast<std::size_t>(a + i));
}

LeafSet LeafSet::refined(int new_resolution) const {
  if (new_resolution < resolution_)
    throw std::invalid_argument("refined: cannot coarsen");
  if (new_resolution == resolution_) return *this;
  LeafSet s(new_resolution);
  int f = new_resolution - resolution_;
  for (std::size_t i = bits_.find_first(); i != boost::dynamic_bitset<>::npos;
       i = bits_.find_next(i)) {
    std::size_t base = i << f;
    for (std::int64_t j = 0; j < pow2ll(f); ++j) s.bits_.set(base + j);
  }
  return s;
}

void LeafSet::require_same(const LeafSet& o) const {
  if (resolution_ != o.resolution_)
    throw std::invalid_argument("LeafSet: resolution mismatch");
}

LeafSet LeafSet::union_with(const LeafSet& o) const {
  require_same(o);
  LeafSet s = *this;
  s.bits_ |= o.bits_;
  return s;
}

LeafSet LeafSet::intersect(const LeafSet& o) const {
  require_same(o);
  LeafSet s = *this;
  s.bits_ &= o.bits_;
  return s;
}

LeafSet LeafSet::difference(const LeafSet& o) const {
  require_same(o);
  LeafSet s = *this;
  s.bits_ -= o.bits_;
  return s;
}

LeafSet LeafSet::complement() const {
  LeafSet s = *this;
  s.bits_.flip();
  return s;
}

bool LeafSet::subset_of(const LeafSet& o) const {
  require_same(o);
  return bits_.is_subset_of(o.bits_);
}

bool LeafSet::disjoint_with(const LeafSet& o) const {
  require_same(o);
  return !bits_.intersects(o.bits_);
}

std::int64_t LeafSet::intersect_count(const LeafSet& o) const {
  require_same(o);
  return static_cast<std::int64_t>((bits_ & o.bits_).count());
}

std::int64_t LeafSet::first_leaf() const {
  std::size_t i = bits_.find_first();
  return i == boost::dynamic_bitset<>::npos ? -1 : static_cast<std::int64_t>(i);
}

std::vector<std::int64_t> LeafSet::leaves() const {
  std::vector<std::int64_t> out;
  for (std::size_t i = bits_.find_first(); i != boost::dynamic_bitset<>::npos;
       i = bits_.find_next(i))
    out.push_back(static_cast<std::int64_t>(i));
  return out;
}

void IntervalCollection::insert(const DyadicInterval& I) {
  if (!I.valid()) throw std::invalid_argument("IntervalCollection: invalid interval");
  auto it = std::lower_bound(items.begin(), items.end(), I,
                             [](const DyadicInterval& a, const DyadicInterval& b) {
                               return a.order() < b.order();
                             });
  if (it != items.end() && *it == I) return;
  items.insert(it, I);
}

bool IntervalCollection::contains(const DyadicInterval& I) const {
  auto it = std::lower_bound(items.begin(), items.end(), I,
                             [](const DyadicInterval& a, const DyadicInterval& b) {
                               return a.order() < b.order();
                             });
  return it != items.end() && *it == I;
}

int IntervalCollection::max_level() const {
  int m = -1;
  for (const auto& I : items) m = std::max(m, I.level);
  return m;
}

bool IntervalCollection::members_pairwise_disjoint() const {
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t j = i + 1; j < items.size(); ++j)
      if (!items[i].disjoint(items[j])) return false;
  return true;
}

LeafSet IntervalCollection::point_set(int resolution) const {
  LeafSet s(resolution);
  for (const auto& I : items) s.add_interval(I);
  return s;
}

std::int64_t IntervalCollection::point_count(int resolution) const {
  return point_set(resolution).count();
}

bool is_nested(const NestedFamily& X) {
  for (std::size_t i = 0; i < X.sets.size(); ++i)
    for (std::size_t j = i + 1; j < X.sets.size(); ++j) {
      const LeafSet& a = X.sets[i];
      const LeafSet& b = X.sets[j];
      if (!a.subset_of(b) && !b.subset_of(a) && !a.disjoint_with(b)) return false;
    }
  return true;
}

std::vector<std::vector<std::size_t>> generation_indices(const NestedFamily& X) {
  std::vector<std::vector<std::size_t>> gens;
  std::vector<std::size_t> remaining(X.sets.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  while (!remaining.empty()) {
    std::vector<std::size_t> gen;
    for (std::size_t i : remaining) {
      bool dominated = false;
      for (std::size_t j : remaining) {
        if (i == j) continue;
        const LeafSet& a = X.sets[i];
        const LeafSet& b = X.sets[j];
        if (a.subset_of(b) && !(a == b)) {
          dominated = true;
          break;
        }
      }
      if (!dominated) gen.push_back(i);
    }
    if (gen.empty()) throw std::logic_error("generation_indices: no maximal member");
    std::vector<std::size_t> rest;
    for (std::size_t i : remaining)
      if (std::find(gen.begin(), gen.end(), i) == gen.end()) rest.push_back(i);
    gens.push_back(std::move(gen));
    remaining = std::move(rest);
  }
  return gens;
}

LeafSet generation_point_set(const NestedFamily& X, const std::vector<std::size_t>& gen) {
  LeafSet s(X.resolution);
  for (std::size_t i : gen) s = s.union_with(X.sets[i]);
  return s;
}

CarlesonValue carleson_constant_exact(const NestedFamily& X) {
  CarlesonValue best;
  // the family is a set of sets: a member repeated in the backing vector is
  // the same set and counts once
  std::vector<bool> first(X.sets.size(), true);
  for (std::size_t i = 0; i < X.sets.size(); ++i)
    for (std::size_t j = 0; j < i && first[i]; ++j)
      if (X.sets[i] == X.sets[j]) first[i] = false;
  for (std::size_t i = 0; i < X.sets.size(); ++i) {
    std::int64_t cn = X.sets[i].count();
    if (cn == 0) continue;
    std::int64_t total = 0;
    for (std::size_t j = 0; j < X.sets.size(); ++j)
      if (first[j] && X.sets[j].subset_of(X.sets[i])) total += X.sets[j].count();
    // total/cn > best.num/best.den, cross-multiplied in 128 bits
    __int128 lhs = static_cast<__int128>(total) * best.den;
    __int128 rhs = static_cast<__int128>(best.num) * cn;
    if (lhs > rhs) {
      best.num = total;
      best.den = cn;
      best.witness = i;
    }
  }
  best.value = best.den == 0 ? 0.0
                             : static_cast<double>(best.num) / static_cast<double>(best.den);
  return best;
}

double carleson_constant(const NestedFamily& X) {
  return carleson_constant_exact(X).value;
}

bool CarlesonValue::exceeds(std::int64_t k, double rho) const {
  if (rho <= 0) throw std::invalid_argument("CarlesonValue::exceeds: rho <= 0");
  // num/den > k/rho  <=>  num * rho > k * den, with rho exactly dyadic.
  Dyadic lhs = Dyadic(num) * Dyadic::from_double(rho);
  Dyadic rhs(k * den);
  return lhs > rhs;
}

}  // namespace hf
