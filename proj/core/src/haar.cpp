#include "haarfactor/haar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hf {

HaarVector::HaarVector(int d) : depth(d) {
  if (d < 0 || d > 24) throw std::invalid_argument("HaarVector: depth out of range");
  coeffs.assign(static_cast<std::size_t>(tree_size(d)), 0.0);
}

HaarVector HaarVector::basis(const DyadicInterval& I, int depth) {
  HaarVector f(depth);
  f.at(I) = 1.0;
  return f;
}

bool HaarVector::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; });
}

namespace {

// The square function along the tree: value at a node is the value at its
// parent plus the squared coefficient. Leaf nodes carry the profile.
template <typename Acc, typename FromCoeff>
std::vector<Acc> square_chain(const HaarVector& f, FromCoeff from) {
  std::vector<Acc> s(f.coeffs.size());
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
    Acc sq = from(f.coeffs[i]) * from(f.coeffs[i]);
    s[i] = i == 0 ? sq : s[(i - 1) / 2] + sq;
  }
  return s;
}

}  // namespace

SquareProfile square_profile(const HaarVector& f) {
  SquareProfile p;
  p.depth = f.depth;
  std::int64_t leaves = pow2ll(f.depth);
  std::int64_t first = tree_size(f.depth) - leaves;  // index of leftmost leaf node
  p.values.resize(static_cast<std::size_t>(leaves));
  if (arith_mode() == ArithMode::Exact) {
    auto s = square_chain<Dyadic>(f, [](double c) { return Dyadic::from_double(c); });
    for (std::int64_t k = 0; k < leaves; ++k)
      p.values[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(first + k)].to_double();
  } else {
    auto s = square_chain<double>(f, [](double c) { return c; });
    for (std::int64_t k = 0; k < leaves; ++k)
      p.values[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(first + k)];
  }
  return p;
}

double sl_inf_norm(const HaarVector& f) {
  SquareProfile p = square_profile(f);
  double m = 0.0;
  for (double v : p.values) m = std::max(m, v);
  return std::sqrt(m);
}

double h1_norm(const HaarVector& f) {
  SquareProfile p = square_profile(f);
  double w = std::ldexp(1.0, -f.depth);
  double total = 0.0;
  for (double v : p.values) total += std::sqrt(v);
  return w * total;
}

double pairing(const HaarVector& f, const HaarVector& g) {
  const HaarVector& a = f.depth >= g.depth ? f : g;
  const HaarVector& b = f.depth >= g.depth ? g : f;
  if (arith_mode() == ArithMode::Exact) {
    Dyadic total;
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) {
      if (a.coeffs[i] == 0.0 || b.coeffs[i] == 0.0) continue;
      int level = interval_from_order(static_cast<std::int64_t>(i) + 1).level;
      Dyadic term = Dyadic::from_double(a.coeffs[i]) * Dyadic::from_double(b.coeffs[i]);
      total += term * Dyadic::scaled(1, -level);
    }
    return total.to_double();
  }
  double total = 0.0;
  for (std::size_t i = 0; i < b.coeffs.size(); ++i) {
    int level = interval_from_order(static_cast<std::int64_t>(i) + 1).level;
    total += a.coeffs[i] * b.coeffs[i] * std::ldexp(1.0, -level);
  }
  return total;
}

double l2_norm_sq(const HaarVector& f) { return pairing(f, f); }

HaarVector rademacher(int n, int depth) {
  if (n < 0 || n > depth) throw std::invalid_argument("rademacher: bad level");
  HaarVector f(depth);
  for (std::int64_t k = 1; k <= pow2ll(n); ++k) f[pow2ll(n) - 1 + k] = 1.0;
  return f;
}

HaarVector zero_pad(const HaarVector& f, int depth) {
  if (depth < f.depth) throw std::invalid_argument("zero_pad: cannot truncate");
  HaarVector g(depth);
  std::copy(f.coeffs.begin(), f.coeffs.end(), g.coeffs.begin());
  return g;
}

HaarVector add(const HaarVector& f, const HaarVector& g) {
  int d = std::max(f.depth, g.depth);
  HaarVector a = zero_pad(f, d);
  const HaarVector b = zero_pad(g, d);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) a.coeffs[i] += b.coeffs[i];
  return a;
}

HaarVector subtract(const HaarVector& f, const HaarVector& g) {
  return add(f, scale(g, -1.0));
}

HaarVector scale(const HaarVector& f, double c) {
  HaarVector g = f;
  for (double& v : g.coeffs) v *= c;
  return g;
}

}  // namespace hf
