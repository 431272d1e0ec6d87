#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "haarfactor/operators.hpp"

namespace hf {

// Block basis data: for every dyadic interval I of level <= outer_depth a
// collection of pairwise disjoint intervals of level <= inner_depth, plus a
// global sign per inner interval. The block vector of I is
//   b_I = sum_{K in collection(I)} signs[K] h_K.
struct BlockBasisFamily {
  int outer_depth = 0;
  int inner_depth = 0;
  std::vector<IntervalCollection> collections;  // index = order_of(I) - 1
  std::vector<std::int8_t> signs;               // index = order_of(K) - 1

  BlockBasisFamily() = default;
  BlockBasisFamily(int n, int N);
  // collection(I) = {I}: the Haar system blocked by itself.
  static BlockBasisFamily trivial(int depth);

  const IntervalCollection& collection(std::int64_t outer_order) const;
  IntervalCollection& collection(std::int64_t outer_order);
  std::int8_t sign(const DyadicInterval& K) const { return signs[K.order() - 1]; }

  HaarVector block_vector(std::int64_t outer_order) const;
  LeafSet point_set(std::int64_t outer_order) const;      // at inner resolution
  std::int64_t point_count(std::int64_t outer_order) const;
  double block_l2_sq(std::int64_t outer_order) const;     // = measure of point set
};

// Same shape with arbitrary measurable members instead of intervals. This is
// what the compatibility checker actually runs on; interval families convert
// by taking each member's leaf set.
struct SetFamily {
  int outer_depth = 0;
  int resolution = 0;
  std::vector<std::vector<LeafSet>> collections;

  LeafSet point_set(std::int64_t outer_order) const;
};

SetFamily as_set_family(const BlockBasisFamily& fam);

struct JonesWitness {
  std::string condition;
  std::string detail;
};

struct JonesReport {
  bool j1_ok = true;   // all members pairwise nested or disjoint
  bool j2_ok = true;   // nonempty collections of disjoint members, no sharing
  bool j3_ok = true;   // point sets disjoint/nested with the index intervals
  bool kappa_finite = true;
  double kappa_measured = 1.0;
  std::int64_t kappa_num = 1;
  std::int64_t kappa_den = 1;
  std::vector<JonesWitness> violations;
  std::vector<std::string> kappa_witnesses;  // all triples achieving the sup

  bool ok() const { return j1_ok && j2_ok && j3_ok && kappa_finite; }
};

// kappa is the exact sup over nested index pairs I0 subset I (reflexive pair
// included) and members K of collection(I) of
//   (|B_{I0}| / |B_I|) / (|K meet B_{I0}| / |K|).
JonesReport verify_jones(const SetFamily& fam);
JonesReport verify_jones(const BlockBasisFamily& fam);

// Forward map f -> sum_I (pairing(f, h_I)/|I|) b_I as a dense operator.
HaarOperator embed_blocks(const BlockBasisFamily& fam);

// Left inverse g -> sum_I (pairing(g, b_I)/|B_I|) h_I.
HaarOperator project_blocks(const BlockBasisFamily& fam);

// Substitute the inner family's blocks for the outer family's intervals:
// members of outer collections are interpreted as inner block indices. The
// composed sign of K is the outer sign of its block times the inner sign.
// Requires outer.inner_depth == inner.outer_depth.
BlockBasisFamily reiterate(const BlockBasisFamily& outer, const BlockBasisFamily& inner);

// The outer family viewed with members measured by their inner point sets;
// this is the family whose compatibility constant multiplies the inner one.
SetFamily outer_as_set_family(const BlockBasisFamily& outer, const BlockBasisFamily& inner);

}  // namespace hf
