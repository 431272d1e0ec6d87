#pragma once

#include <vector>

#include "haarfactor/dyadic.hpp"

namespace hf {

// Haar coefficient vector over all dyadic intervals of level <= depth,
// stored breadth first: coeffs[order_of(I) - 1]. The function it encodes is
// sum_I coeffs[I] h_I with h_I the L^infinity-normalized Haar function.
struct HaarVector {
  int depth = 0;
  std::vector<double> coeffs;

  HaarVector() : coeffs(1, 0.0) {}
  explicit HaarVector(int d);
  static HaarVector basis(const DyadicInterval& I, int depth);

  std::int64_t size() const { return static_cast<std::int64_t>(coeffs.size()); }
  double operator[](std::int64_t order) const { return coeffs[order - 1]; }
  double& operator[](std::int64_t order) { return coeffs[order - 1]; }
  double at(const DyadicInterval& I) const { return coeffs[I.order() - 1]; }
  double& at(const DyadicInterval& I) { return coeffs[I.order() - 1]; }
  bool is_zero() const;
};

// Pointwise square function sum_{I >= K} coeffs[I]^2 evaluated on the leaves
// K of level `depth`, left to right.
struct SquareProfile {
  int depth = 0;
  std::vector<double> values;
};

SquareProfile square_profile(const HaarVector& f);

// sup_K sqrt(square function): the supremum is over the finest leaves, which
// is enough because the square function grows along branches.
double sl_inf_norm(const HaarVector& f);

// sum_K |K| sqrt(square function at K) over the finest leaves.
double h1_norm(const HaarVector& f);

// Integral pairing sum_I a_I b_I |I|; shorter vectors are zero padded.
double pairing(const HaarVector& f, const HaarVector& g);

// sum_I a_I^2 |I| = L^2 norm squared.
double l2_norm_sq(const HaarVector& f);

// All-ones coefficients on level n, zero elsewhere.
HaarVector rademacher(int n, int depth);

HaarVector zero_pad(const HaarVector& f, int depth);
HaarVector add(const HaarVector& f, const HaarVector& g);
HaarVector subtract(const HaarVector& f, const HaarVector& g);
HaarVector scale(const HaarVector& f, double c);

}  // namespace hf
