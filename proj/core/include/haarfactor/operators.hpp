#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "haarfactor/haar.hpp"

namespace hf {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Linear map between Haar coefficient spaces, stored densely: column
// order_of(J)-1 holds the coefficients of the image of h_J.
struct HaarOperator {
  int out_depth = 0;
  int in_depth = 0;
  Matrix A;

  HaarOperator() : A(Matrix::Zero(1, 1)) {}
  HaarOperator(int out_d, int in_d);
  static HaarOperator identity(int depth);
  static HaarOperator zero_op(int depth);
  // Diagonal operator h_I -> diag[order-1] h_I.
  static HaarOperator multiplier(const std::vector<double>& diag, int depth);

  bool square() const { return out_depth == in_depth; }
  int depth() const;
  double entry(const DyadicInterval& row, const DyadicInterval& col) const {
    return A(row.order() - 1, col.order() - 1);
  }
};

HaarVector apply(const HaarOperator& T, const HaarVector& f);

// Adjoint for the integral pairing: pairing(adjoint(T) g, f) = pairing(g, T f).
HaarOperator adjoint(const HaarOperator& T);

HaarOperator compose(const HaarOperator& a, const HaarOperator& b);  // a after b
HaarOperator add(const HaarOperator& a, const HaarOperator& b);
HaarOperator subtract(const HaarOperator& a, const HaarOperator& b);
HaarOperator identity_minus(const HaarOperator& T);

// T h_K = alpha_K h_K + r_K with r_K having no h_K component.
std::pair<double, HaarVector> decompose(const HaarOperator& T, const DyadicInterval& K);

bool has_large_diagonal(const HaarOperator& T, double delta);

// Flip columns so every diagonal entry is >= 0; signs[order-1] records the
// flip. Zero diagonal entries keep sign +1.
HaarOperator normalize_diagonal(const HaarOperator& T, std::vector<std::int8_t>& signs);

// Certified upper bound for the operator norm on the sup-square-function
// space: combine row absolute sums along every branch of the output tree.
double opnorm_upper(const HaarOperator& T);

struct NormEstimate {
  double lower = 0.0;
  double upper = 0.0;
  HaarVector witness;
};

// Upper bound as above; lower bound from the best witness among the basis
// vectors plus `budget` random sign vectors improved by greedy flips.
// witness is normalized so lower = norm of its image.
NormEstimate opnorm_bounds(const HaarOperator& T, int budget);

enum class OperatorKind { DiagDominant, Multiplier, ProjectionLike };

struct RandomOpSpec {
  OperatorKind kind = OperatorKind::DiagDominant;
  double delta = 0.5;   // DiagDominant: diagonal magnitudes land in [delta, 1]
  double noise = 0.0;   // DiagDominant: off-diagonal entries in [-noise, noise]
  int rank = 0;         // ProjectionLike: 0 picks dim/3 + 1
};

// Deterministic in (depth, spec, seed); identical bytes across platforms.
HaarOperator random_operator(int depth, const RandomOpSpec& spec, std::uint64_t seed);

// The uniform [0,1) variate used by all samplers in this library.
double uniform01(std::uint64_t raw);

}  // namespace hf
