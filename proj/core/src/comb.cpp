#include "haarfactor/comb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "haarfactor/errors.hpp"

namespace hf {

FrequencyWeight::FrequencyWeight(int d) : depth(d) {
  omega.assign(static_cast<std::size_t>(tree_size(d)), 0.0);
  rel.assign(static_cast<std::size_t>(tree_size(d)), Dyadic());
}

FrequencyWeight FrequencyWeight::from_values(int depth, const std::vector<double>& values) {
  FrequencyWeight w(depth);
  if (values.size() != w.omega.size())
    throw std::invalid_argument("FrequencyWeight: size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) throw std::invalid_argument("FrequencyWeight: negative weight");
    int lvl = interval_from_order(static_cast<std::int64_t>(i) + 1).level;
    w.omega[i] = values[i];
    w.rel[i] = Dyadic::from_double(values[i]) * Dyadic::scaled(1, lvl);
  }
  return w;
}

FrequencyWeight frequency_weight(const std::vector<HaarVector>& fs,
                                 const std::vector<HaarVector>& gs, int depth) {
  FrequencyWeight w(depth);
  auto coeff = [](const HaarVector& v, std::size_t i) {
    return i < v.coeffs.size() ? v.coeffs[i] : 0.0;
  };
  for (std::size_t i = 0; i < w.rel.size(); ++i) {
    Dyadic r;
    for (const HaarVector& f : fs) r += Dyadic::from_double(std::abs(coeff(f, i)));
    for (const HaarVector& g : gs) r += Dyadic::from_double(std::abs(coeff(g, i)));
    int lvl = interval_from_order(static_cast<std::int64_t>(i) + 1).level;
    w.rel[i] = r;
    w.omega[i] = (r * Dyadic::scaled(1, -lvl)).to_double();
  }
  return w;
}

std::int64_t cover_window_size(double rho, double tau) {
  if (rho <= 0.0 || tau <= 0.0)
    throw std::invalid_argument("cover_window_size: rho, tau must be positive");
  bigrational q = bigrational(4) / (rational_from_double(rho) * rational_from_double(rho) *
                                    rational_from_double(tau) * rational_from_double(tau));
  bigint fl = boost::multiprecision::numerator(q) / boost::multiprecision::denominator(q);
  if (fl > bigint(std::int64_t(1) << 62)) return std::int64_t(1) << 62;
  return fl.convert_to<std::int64_t>();
}

LevelCover select_level_cover(const DyadicInterval& K0, const FrequencyWeight& w,
                              double tau, double rho, int r, int level_cap) {
  if (!(tau > 0.0) || !(rho > 0.0) || !(rho < 1.0))
    throw std::invalid_argument("select_level_cover: need tau > 0 and rho in (0,1)");
  if (r < K0.level)
    throw StructuredFailure("select_level_cover.precondition",
                            "window floor is coarser than the base interval",
                            {{"r", static_cast<double>(r)},
                             {"base_level", static_cast<double>(K0.level)}});
  int cap = std::min(level_cap, w.depth);
  Dyadic tau_d = Dyadic::from_double(tau);
  Dyadic target = (Dyadic(1) - Dyadic::from_double(rho)) * Dyadic::scaled(1, -K0.level);

  int best_k = -1;
  Dyadic best_cov;
  for (int k = r; k <= cap; ++k) {
    std::int64_t first = (K0.position - 1) << (k - K0.level);
    std::int64_t span = pow2ll(k - K0.level);
    IntervalCollection good;
    std::int64_t cnt = 0;
    for (std::int64_t t = 0; t < span; ++t) {
      DyadicInterval K{k, first + t + 1};
      if (w.rel[static_cast<std::size_t>(K.order() - 1)] <= tau_d) {
        good.insert(K);
        ++cnt;
      }
    }
    Dyadic cov = Dyadic::scaled(cnt, -k);
    if (best_k < 0 || cov > best_cov) {
      best_k = k;
      best_cov = cov;
    }
    if (cov >= target) {
      LevelCover out;
      out.k = k;
      out.good = std::move(good);
      out.coverage = Dyadic::scaled(cnt << K0.level, -k).to_double();
      return out;
    }
  }
  throw StructuredFailure(
      "select_level_cover.exhausted", "no level in the window reaches the coverage target",
      {{"r", static_cast<double>(r)},
       {"level_cap", static_cast<double>(cap)},
       {"best_level", static_cast<double>(best_k)},
       {"best_coverage", best_k < 0 ? 0.0
                                    : (best_cov * Dyadic::scaled(1, K0.level)).to_double()},
       {"target", 1.0 - rho}});
}

namespace {

// Preference order for roots: larger measure, then smaller first leaf, then
// lexicographically earlier leaf pattern. Deterministic regardless of the
// order members arrive in.
bool root_preferred(const LeafSet& a, const LeafSet& b) {
  if (a.count() != b.count()) return a.count() > b.count();
  if (a.first_leaf() != b.first_leaf()) return a.first_leaf() < b.first_leaf();
  return a.leaves() < b.leaves();
}

std::vector<std::size_t> root_candidates(const NestedFamily& X) {
  std::vector<std::size_t> idx(X.sets.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&X](std::size_t a, std::size_t b) {
    return root_preferred(X.sets[a], X.sets[b]);
  });
  return idx;
}

NestedFamily family_under(const NestedFamily& X, const LeafSet& root) {
  NestedFamily sub;
  sub.resolution = X.resolution;
  for (const LeafSet& s : X.sets)
    if (s.subset_of(root)) sub.sets.push_back(s);
  return sub;
}

}  // namespace

DenseRootPick best_dense_root(const NestedFamily& X, int k) {
  if (X.empty()) throw std::invalid_argument("best_dense_root: empty family");
  DenseRootPick best;
  bool have = false;
  for (std::size_t i : root_candidates(X)) {
    const LeafSet& root = X.sets[i];
    std::int64_t croot = root.count();
    if (croot == 0) continue;
    NestedFamily sub = family_under(X, root);
    auto gens = generation_indices(sub);
    std::int64_t num = croot;  // density of generation 0 is 1
    std::int64_t den = croot;
    std::vector<double> dens;
    for (int l = 0; l <= k; ++l) {
      std::int64_t c = 0;
      if (static_cast<std::size_t>(l) < gens.size())
        c = generation_point_set(sub, gens[static_cast<std::size_t>(l)]).count();
      dens.push_back(static_cast<double>(c) / static_cast<double>(croot));
      if (static_cast<__int128>(c) * den < static_cast<__int128>(num) * croot) {
        num = c;
        den = croot;
      }
    }
    if (!have || static_cast<__int128>(num) * best.den > static_cast<__int128>(best.num) * den) {
      best.index = i;
      best.num = num;
      best.den = den;
      best.densities = std::move(dens);
      have = true;
    }
  }
  if (!have) throw std::invalid_argument("best_dense_root: only empty members");
  return best;
}

DenseRootResult find_dense_root(const NestedFamily& X, int k, double rho) {
  if (!(rho > 0.0) || !(rho < 1.0))
    throw std::invalid_argument("find_dense_root: rho out of (0,1)");
  CarlesonValue cc = carleson_constant_exact(X);
  if (!cc.exceeds(k, rho))
    throw StructuredFailure("find_dense_root.precondition",
                            "Carleson constant does not exceed k/rho",
                            {{"carleson", cc.value},
                             {"k", static_cast<double>(k)},
                             {"rho", rho}});
  Dyadic keep = Dyadic(1) - Dyadic::from_double(rho);
  for (std::size_t i : root_candidates(X)) {
    const LeafSet& root = X.sets[i];
    std::int64_t croot = root.count();
    if (croot == 0) continue;
    NestedFamily sub = family_under(X, root);
    auto gens = generation_indices(sub);
    if (gens.size() <= static_cast<std::size_t>(k)) continue;
    bool all = true;
    std::vector<double> dens;
    for (int l = 0; l <= k && all; ++l) {
      std::int64_t c = generation_point_set(sub, gens[static_cast<std::size_t>(l)]).count();
      dens.push_back(static_cast<double>(c) / static_cast<double>(croot));
      if (!(Dyadic(c) > keep * Dyadic(croot))) all = false;
    }
    if (all) {
      DenseRootResult out;
      out.index = i;
      out.root = root;
      out.under = std::move(sub);
      out.densities = std::move(dens);
      return out;
    }
  }
  throw StructuredFailure("find_dense_root.exhausted",
                          "no member passes the generation density test: "
                          "internal consistency violation",
                          {{"carleson", cc.value}});
}

PruneResult prune_to_dense(const NestedFamily& X, int n, double alpha, double beta,
                           bool enforce) {
  if (n < 0) throw std::invalid_argument("prune_to_dense: n < 0");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::invalid_argument("prune_to_dense: beta out of (0,1)");
  Dyadic beta_pow(1);
  for (int i = 0; i <= n; ++i) beta_pow = beta_pow * Dyadic::from_double(beta);
  if (enforce) {
    bool alpha_ok = alpha > 0.0 &&
                    Dyadic::from_double(alpha) < Dyadic::scaled(1, -n - 1) * beta_pow;
    if (!alpha_ok)
      throw StructuredFailure("prune_to_dense.precondition",
                              "alpha must lie in (0, 2^{-n-1} beta^{n+1})",
                              {{"alpha", alpha}, {"beta", beta},
                               {"n", static_cast<double>(n)}});
  }

  auto gens = generation_indices(X);
  if (gens.size() <= static_cast<std::size_t>(n))
    throw StructuredFailure("prune_to_dense.generations",
                            "family has too few generations",
                            {{"generations", static_cast<double>(gens.size())},
                             {"n", static_cast<double>(n)}});

  LeafSet g0 = generation_point_set(X, gens[0]);
  LeafSet gn = generation_point_set(X, gens[static_cast<std::size_t>(n)]);
  if (enforce) {
    // |G_n(X)| > (1 - alpha) |G_0(X)|
    if (!(Dyadic(gn.count()) > (Dyadic(1) - Dyadic::from_double(alpha)) * Dyadic(g0.count())))
      throw StructuredFailure("prune_to_dense.precondition",
                              "generation n does not nearly cover generation 0",
                              {{"gn_count", static_cast<double>(gn.count())},
                               {"g0_count", static_cast<double>(g0.count())},
                               {"alpha", alpha}});
  }

  PruneResult res;
  res.Y.resolution = X.resolution;
  Dyadic keep = Dyadic(1) - Dyadic::from_double(beta);

  std::vector<std::vector<std::size_t>> layers(static_cast<std::size_t>(n) + 1);
  layers[0] = gens[static_cast<std::size_t>(n)];
  res.F.push_back(gn);
  LeafSet prefix = gn;
  for (int j = 1; j <= n; ++j) {
    LeafSet fj(X.resolution);
    for (std::size_t idx : gens[static_cast<std::size_t>(n - j)]) {
      const LeafSet& N = X.sets[idx];
      std::int64_t cN = N.count();
      std::int64_t cNP = N.intersect_count(prefix);
      if (Dyadic(cNP) >= keep * Dyadic(cN)) {
        layers[static_cast<std::size_t>(j)].push_back(idx);
        fj = fj.union_with(N);
      }
    }
    res.F.push_back(fj);
    prefix = prefix.intersect(fj);
  }
  res.F_intersection = prefix;

  for (const auto& layer : layers)
    for (std::size_t idx : layer)
      if (!X.sets[idx].disjoint_with(prefix)) res.picked.push_back(idx);
  std::sort(res.picked.begin(), res.picked.end());
  for (std::size_t idx : res.picked) res.Y.sets.push_back(X.sets[idx]);

  // conclusions, all exact
  if (!res.Y.empty()) {
    auto gensY = generation_indices(res.Y);
    if (gensY.size() > static_cast<std::size_t>(n)) {
      LeafSet gnY = generation_point_set(res.Y, gensY[static_cast<std::size_t>(n)]);
      res.gn_is_intersection = gnY == prefix;
      bigrational lhs(gnY.count(), std::max<std::int64_t>(g0.count(), 1));
      bigrational beta_pow_r = 1;
      for (int i = 0; i <= n; ++i) beta_pow_r *= rational_from_double(beta);
      bigrational coef = bigrational(1) - rational_from_double(alpha) *
                                              bigrational(bigint(1) << (n + 1)) / beta_pow_r;
      res.conclusion_a = lhs > coef;
      res.conclusion_b = true;
      for (const LeafSet& N : res.Y.sets) {
        if (!(Dyadic(N.intersect_count(gnY)) >= keep * Dyadic(N.count()))) {
          res.conclusion_b = false;
          break;
        }
      }
    }
  }

  if (enforce && !(res.conclusion_a && res.conclusion_b && res.gn_is_intersection))
    throw std::logic_error("prune_to_dense: conclusions failed despite preconditions");
  return res;
}

}  // namespace hf
