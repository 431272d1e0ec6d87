#include "haarfactor/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hf {

HaarOperator::HaarOperator(int out_d, int in_d) : out_depth(out_d), in_depth(in_d) {
  if (out_d < 0 || out_d > 14 || in_d < 0 || in_d > 14)
    throw std::invalid_argument("HaarOperator: depth out of range");
  A = Matrix::Zero(tree_size(out_d), tree_size(in_d));
}

HaarOperator HaarOperator::identity(int depth) {
  HaarOperator T(depth, depth);
  T.A.setIdentity();
  return T;
}

HaarOperator HaarOperator::zero_op(int depth) { return HaarOperator(depth, depth); }

HaarOperator HaarOperator::multiplier(const std::vector<double>& diag, int depth) {
  HaarOperator T(depth, depth);
  if (diag.size() != static_cast<std::size_t>(tree_size(depth)))
    throw std::invalid_argument("multiplier: diagonal size mismatch");
  for (std::size_t i = 0; i < diag.size(); ++i) T.A(i, i) = diag[i];
  return T;
}

int HaarOperator::depth() const {
  if (!square()) throw std::logic_error("depth(): operator is not square");
  return in_depth;
}

HaarVector apply(const HaarOperator& T, const HaarVector& f) {
  if (f.depth != T.in_depth) throw std::invalid_argument("apply: depth mismatch");
  HaarVector g(T.out_depth);
  Eigen::Map<const Eigen::VectorXd> x(f.coeffs.data(), f.coeffs.size());
  Eigen::Map<Eigen::VectorXd> y(g.coeffs.data(), g.coeffs.size());
  y = T.A * x;
  return g;
}

HaarOperator adjoint(const HaarOperator& T) {
  HaarOperator S(T.in_depth, T.out_depth);
  for (std::int64_t i = 0; i < T.A.rows(); ++i) {
    int li = interval_from_order(i + 1).level;
    for (std::int64_t j = 0; j < T.A.cols(); ++j) {
      int lj = interval_from_order(j + 1).level;
      // weights are powers of two, so the rescaling is exact
      S.A(j, i) = std::ldexp(T.A(i, j), lj - li);
    }
  }
  return S;
}

HaarOperator compose(const HaarOperator& a, const HaarOperator& b) {
  if (a.in_depth != b.out_depth) throw std::invalid_argument("compose: depth mismatch");
  HaarOperator c(a.out_depth, b.in_depth);
  c.A = a.A * b.A;
  return c;
}

HaarOperator add(const HaarOperator& a, const HaarOperator& b) {
  if (a.out_depth != b.out_depth || a.in_depth != b.in_depth)
    throw std::invalid_argument("add: depth mismatch");
  HaarOperator c = a;
  c.A += b.A;
  return c;
}

HaarOperator subtract(const HaarOperator& a, const HaarOperator& b) {
  if (a.out_depth != b.out_depth || a.in_depth != b.in_depth)
    throw std::invalid_argument("subtract: depth mismatch");
  HaarOperator c = a;
  c.A -= b.A;
  return c;
}

HaarOperator identity_minus(const HaarOperator& T) {
  return subtract(HaarOperator::identity(T.depth()), T);
}

std::pair<double, HaarVector> decompose(const HaarOperator& T, const DyadicInterval& K) {
  HaarVector img = apply(T, HaarVector::basis(K, T.in_depth));
  double alpha = img.at(K);
  img.at(K) = 0.0;
  return {alpha, img};
}

bool has_large_diagonal(const HaarOperator& T, double delta) {
  for (std::int64_t i = 0; i < T.A.rows() && i < T.A.cols(); ++i)
    if (std::abs(T.A(i, i)) < delta) return false;
  return true;
}

HaarOperator normalize_diagonal(const HaarOperator& T, std::vector<std::int8_t>& signs) {
  if (!T.square()) throw std::invalid_argument("normalize_diagonal: not square");
  signs.assign(static_cast<std::size_t>(T.A.cols()), 1);
  HaarOperator S = T;
  for (std::int64_t j = 0; j < T.A.cols(); ++j)
    if (T.A(j, j) < 0.0) {
      signs[static_cast<std::size_t>(j)] = -1;
      S.A.col(j) *= -1.0;
    }
  return S;
}

double opnorm_upper(const HaarOperator& T) {
  // For any f with square function bounded by 1, each output coefficient is
  // at most the row absolute sum; push those through the output tree.
  HaarVector rowabs(T.out_depth);
  for (std::int64_t i = 0; i < T.A.rows(); ++i)
    rowabs.coeffs[static_cast<std::size_t>(i)] = T.A.row(i).cwiseAbs().sum();
  return sl_inf_norm(rowabs);
}

namespace {

double witness_ratio(const HaarOperator& T, const HaarVector& w) {
  double nw = sl_inf_norm(w);
  if (nw == 0.0) return 0.0;
  return sl_inf_norm(apply(T, w)) / nw;
}

}  // namespace

double uniform01(std::uint64_t raw) {
  // Top 53 bits, mapped to [0,1). Identical on every platform, unlike the
  // standard library distributions.
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

NormEstimate opnorm_bounds(const HaarOperator& T, int budget) {
  NormEstimate est;
  est.upper = opnorm_upper(T);
  est.witness = HaarVector(T.in_depth);
  if (budget <= 0) return est;

  std::int64_t dim = tree_size(T.in_depth);
  HaarVector best(T.in_depth);
  double best_ratio = -1.0;
  for (std::int64_t j = 1; j <= dim; ++j) {
    HaarVector e(T.in_depth);
    e[j] = 1.0;
    double r = witness_ratio(T, e);
    if (r > best_ratio) {
      best_ratio = r;
      best = e;
    }
  }

  std::mt19937_64 rng(0x5eedULL);
  int tries = std::max(0, budget - 1);
  for (int t = 0; t < tries; ++t) {
    HaarVector w(T.in_depth);
    for (double& c : w.coeffs) c = uniform01(rng()) < 0.5 ? -1.0 : 1.0;
    double r = witness_ratio(T, w);
    // greedy single-coefficient sign flips until no improvement
    bool improved = true;
    while (improved) {
      improved = false;
      for (double& c : w.coeffs) {
        c = -c;
        double r2 = witness_ratio(T, w);
        if (r2 > r) {
          r = r2;
          improved = true;
        } else {
          c = -c;
        }
      }
    }
    if (r > best_ratio) {
      best_ratio = r;
      best = w;
    }
  }

  double nw = sl_inf_norm(best);
  if (nw > 0.0) {
    best = scale(best, 1.0 / nw);
    est.lower = sl_inf_norm(apply(T, best));
    est.witness = best;
  }
  return est;
}

HaarOperator random_operator(int depth, const RandomOpSpec& spec, std::uint64_t seed) {
  std::int64_t dim = tree_size(depth);
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(spec.kind) + 1)));
  auto u = [&rng]() { return uniform01(rng()); };
  HaarOperator T(depth, depth);

  switch (spec.kind) {
    case OperatorKind::DiagDominant: {
      if (spec.delta <= 0.0 || spec.delta > 1.0)
        throw std::invalid_argument("random_operator: delta out of (0,1]");
      for (std::int64_t i = 0; i < dim; ++i) {
        double mag = spec.delta + (1.0 - spec.delta) * u();
        double sgn = u() < 0.5 ? -1.0 : 1.0;
        T.A(i, i) = sgn * mag;
      }
      for (std::int64_t i = 0; i < dim; ++i)
        for (std::int64_t j = 0; j < dim; ++j)
          if (i != j) T.A(i, j) = spec.noise * (2.0 * u() - 1.0);
      break;
    }
    case OperatorKind::Multiplier: {
      for (std::int64_t i = 0; i < dim; ++i) T.A(i, i) = 2.0 * u() - 1.0;
      break;
    }
    case OperatorKind::ProjectionLike: {
      int rank = spec.rank > 0 ? spec.rank : static_cast<int>(dim / 3 + 1);
      rank = std::min<int>(rank, static_cast<int>(dim));
      // weighted Gram-Schmidt of random columns; P = U U^t W is then a
      // projection for the integral pairing
      Eigen::VectorXd w(dim);
      for (std::int64_t i = 0; i < dim; ++i)
        w(i) = std::ldexp(1.0, -interval_from_order(i + 1).level);
      Matrix U(dim, rank);
      int got = 0;
      int guard = 0;
      while (got < rank && guard < 16 * rank) {
        ++guard;
        Eigen::VectorXd v(dim);
        for (std::int64_t i = 0; i < dim; ++i) v(i) = 2.0 * u() - 1.0;
        for (int c = 0; c < got; ++c) {
          double proj = (U.col(c).array() * v.array() * w.array()).sum();
          v -= proj * U.col(c);
        }
        double nn = (v.array() * v.array() * w.array()).sum();
        if (nn < 1e-12) continue;
        U.col(got) = v / std::sqrt(nn);
        ++got;
      }
      if (got < rank) throw std::logic_error("random_operator: degenerate projection draw");
      T.A = U * (U.transpose() * w.asDiagonal());
      break;
    }
  }
  return T;
}

}  // namespace hf
