#include "haarfactor/directsum.hpp"

#include <cmath>
#include <stdexcept>

namespace hf {

DirectSumVector DirectSumVector::zero(int M, double r) {
  if (M < 0) throw std::invalid_argument("DirectSumVector: M must be >= 0");
  if (!(r >= 1.0)) throw std::invalid_argument("DirectSumVector: r must be >= 1");
  DirectSumVector x;
  x.M = M;
  x.r = r;
  x.blocks.reserve(static_cast<std::size_t>(M) + 1);
  for (int k = 0; k <= M; ++k) x.blocks.push_back(HaarVector(k));
  return x;
}

bool DirectSumVector::well_formed() const {
  if (M < 0 || !(r >= 1.0)) return false;
  if (blocks.size() != static_cast<std::size_t>(M) + 1) return false;
  for (int k = 0; k <= M; ++k)
    if (blocks[static_cast<std::size_t>(k)].depth != k) return false;
  return true;
}

double dsum_norm(const DirectSumVector& x, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("dsum_norm: r must be >= 1");
  if (!x.well_formed()) throw std::invalid_argument("dsum_norm: malformed direct sum");
  if (std::isinf(r)) {
    double m = 0.0;
    for (const auto& b : x.blocks) m = std::max(m, sl_inf_norm(b));
    return m;
  }
  double acc = 0.0;
  for (const auto& b : x.blocks) acc += std::pow(sl_inf_norm(b), r);
  return std::pow(acc, 1.0 / r);
}

double dsum_norm(const DirectSumVector& x) { return dsum_norm(x, x.r); }

DyadicInterval gap_interval(int n) {
  if (n < 0) throw std::invalid_argument("gap_interval: n must be >= 0");
  return DyadicInterval{n + 1, pow2ll(n + 1) - 1};
}

std::optional<int> gap_of(const DyadicInterval& I) {
  for (int n = 0; n + 1 <= I.level; ++n)
    if (gap_interval(n).contains(I)) return n;
  return std::nullopt;
}

DyadicInterval embed_interval(const DyadicInterval& I, int n) {
  if (!I.valid()) throw std::invalid_argument("embed_interval: invalid interval");
  if (n < 0) throw std::invalid_argument("embed_interval: n must be >= 0");
  const int level = I.level + n + 1;
  const std::int64_t position = pow2ll(level) - pow2ll(I.level + 1) + I.position;
  return DyadicInterval{level, position};
}

HaarVector embed_sum(const DirectSumVector& x, int target_depth) {
  if (!x.well_formed()) throw std::invalid_argument("embed_sum: malformed direct sum");
  const int need = 2 * x.M + 1;
  if (target_depth < 0) target_depth = need;
  if (target_depth < need)
    throw std::invalid_argument("embed_sum: target depth too small");
  HaarVector out(target_depth);
  for (int n = 0; n <= x.M; ++n) {
    const HaarVector& b = x.blocks[static_cast<std::size_t>(n)];
    for (std::int64_t ord = 1; ord <= tree_size(b.depth); ++ord) {
      const double a = b[ord];
      if (a == 0.0) continue;
      out[embed_interval(interval_from_order(ord), n).order()] = a;
    }
  }
  return out;
}

HaarVector gap_projection(const HaarVector& f) {
  HaarVector out(f.depth);
  for (std::int64_t ord = 1; ord <= tree_size(f.depth); ++ord) {
    const double a = f[ord];
    if (a == 0.0) continue;
    if (gap_of(interval_from_order(ord)).has_value()) out[ord] = a;
  }
  return out;
}

DirectSumVector split_blocks(const HaarVector& f) {
  DirectSumVector x = DirectSumVector::zero(f.depth, std::numeric_limits<double>::infinity());
  for (int k = 0; k <= f.depth; ++k) {
    HaarVector& b = x.blocks[static_cast<std::size_t>(k)];
    for (std::int64_t ord = 1; ord <= tree_size(k); ++ord) b[ord] = f[ord];
  }
  return x;
}

HaarVector last_block(const DirectSumVector& x) {
  if (!x.well_formed()) throw std::invalid_argument("last_block: malformed direct sum");
  return x.blocks.back();
}

}  // namespace hf
