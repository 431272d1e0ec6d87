#pragma once

// Shared helpers for the test suites: deterministic instance generators and
// reference implementations kept deliberately naive so they cannot share
// bugs with the library's tree-DP / incremental algorithms.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include <haarfactor/comb.hpp>
#include <haarfactor/directsum.hpp>
#include <haarfactor/dyadic.hpp>
#include <haarfactor/errors.hpp>
#include <haarfactor/haar.hpp>
#include <haarfactor/jones.hpp>
#include <haarfactor/operators.hpp>

namespace tsup {

using namespace hf;

struct ArithScope {
  explicit ArithScope(ArithMode m) { set_arith_mode(m); }
  ~ArithScope() { clear_arith_mode_override(); }
  ArithScope(const ArithScope&) = delete;
  ArithScope& operator=(const ArithScope&) = delete;
};

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }
inline double unif(std::mt19937_64& g) { return uniform01(g()); }
inline double sym(std::mt19937_64& g) { return 2.0 * unif(g) - 1.0; }

inline HaarVector random_vector(int depth, std::uint64_t seed, double density = 1.0) {
  auto g = make_rng(seed);
  HaarVector f(depth);
  for (double& c : f.coeffs)
    if (density >= 1.0 || unif(g) < density) c = sym(g);
  return f;
}

// --- reference norms: per-leaf ancestor walk, no shared code with the DP ---

struct RefNorms {
  double sl = 0.0;
  double h1 = 0.0;
};

inline RefNorms ref_norms(const HaarVector& f) {
  const std::int64_t leaves = pow2ll(f.depth);
  RefNorms out;
  std::vector<double> profile(static_cast<std::size_t>(leaves));
  for (std::int64_t leaf = 0; leaf < leaves; ++leaf) {
    DyadicInterval L{f.depth, leaf + 1};
    if (arith_mode() == ArithMode::Exact) {
      Dyadic acc;
      for (int lvl = 0; lvl <= f.depth; ++lvl) {
        Dyadic c = Dyadic::from_double(f.at(L.ancestor_at(lvl)));
        acc += c * c;
      }
      profile[static_cast<std::size_t>(leaf)] = acc.to_double();
    } else {
      double acc = 0.0;
      for (int lvl = 0; lvl <= f.depth; ++lvl) {
        double c = f.at(L.ancestor_at(lvl));
        acc += c * c;
      }
      profile[static_cast<std::size_t>(leaf)] = acc;
    }
  }
  double m = 0.0;
  for (double v : profile) m = std::max(m, v);
  out.sl = std::sqrt(m);
  double total = 0.0;
  for (double v : profile) total += std::sqrt(v);
  out.h1 = std::ldexp(1.0, -f.depth) * total;
  return out;
}

inline double ref_pairing(const HaarVector& f, const HaarVector& g) {
  double total = 0.0;
  const std::int64_t m = std::min(f.size(), g.size());
  for (std::int64_t ord = 1; ord <= m; ++ord)
    total += f[ord] * g[ord] * interval_from_order(ord).measure();
  return total;
}

// --- exact rational square profiles, independent of the arithmetic mode ---

inline bigrational rational_pairing(const HaarVector& f, const HaarVector& g) {
  bigrational total = 0;
  const std::int64_t m = std::min(f.size(), g.size());
  for (std::int64_t ord = 1; ord <= m; ++ord) {
    if (f[ord] == 0.0 || g[ord] == 0.0) continue;
    bigrational meas(bigint(1), bigint(1) << interval_from_order(ord).level);
    total += rational_from_double(f[ord]) * rational_from_double(g[ord]) * meas;
  }
  return total;
}

inline bigrational rational_profile_max(const std::vector<bigrational>& coeffs, int depth) {
  // coeffs is order-indexed (coeffs[order-1]); returns max_K sum_{I >= K} c_I^2
  bigrational best = 0;
  for (std::int64_t leaf = 0; leaf < pow2ll(depth); ++leaf) {
    DyadicInterval L{depth, leaf + 1};
    bigrational acc = 0;
    for (int lvl = 0; lvl <= depth; ++lvl) {
      const bigrational& c = coeffs[static_cast<std::size_t>(L.ancestor_at(lvl).order() - 1)];
      acc += c * c;
    }
    if (acc > best) best = acc;
  }
  return best;
}

inline std::vector<bigrational> rational_coeffs(const HaarVector& f) {
  std::vector<bigrational> c(f.coeffs.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = rational_from_double(f.coeffs[i]);
  return c;
}

// --- brute-force Carleson constant ---

struct RefCarleson {
  std::int64_t num = 0;
  std::int64_t den = 1;
  std::size_t witness = 0;
};

inline RefCarleson ref_carleson(const NestedFamily& X) {
  RefCarleson best;
  auto repeat = [&X](std::size_t j) {
    for (std::size_t p = 0; p < j; ++p)
      if (X.sets[p] == X.sets[j]) return true;
    return false;
  };
  for (std::size_t i = 0; i < X.sets.size(); ++i) {
    if (X.sets[i].empty()) continue;
    std::int64_t total = 0;
    for (std::size_t j = 0; j < X.sets.size(); ++j)
      if (!repeat(j) && X.sets[j].subset_of(X.sets[i])) total += X.sets[j].count();
    const std::int64_t den = X.sets[i].count();
    if (static_cast<__int128>(total) * best.den >
        static_cast<__int128>(best.num) * den) {
      best.num = total;
      best.den = den;
      best.witness = i;
    }
  }
  return best;
}

// --- exhaustive sign oracle over one collection ---

inline double ref_sign_value(const IntervalCollection& coll, const std::vector<int>& eps,
                             const HaarOperator& T) {
  double x = 0.0;
  for (std::size_t a = 0; a < coll.size(); ++a)
    for (std::size_t b = 0; b < coll.size(); ++b) {
      if (a == b) continue;
      const DyadicInterval& Ka = coll.items[a];
      const DyadicInterval& Kb = coll.items[b];
      x += eps[a] * eps[b] * T.entry(Kb, Ka) * Kb.measure();
    }
  return x;
}

inline double ref_best_sign_value(const IntervalCollection& coll, const HaarOperator& T) {
  const std::size_t m = coll.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> eps(m, 1);
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << m); ++mask) {
    for (std::size_t t = 0; t < m; ++t) eps[t] = (mask >> t) & 1 ? -1 : 1;
    best = std::max(best, ref_sign_value(coll, eps, T));
  }
  return best;
}

// --- independent compatibility-constant computation ---

struct RefKappa {
  bool finite = true;
  bigrational value = 1;
};

inline RefKappa ref_kappa(const BlockBasisFamily& fam) {
  RefKappa out;
  const int N = fam.inner_depth;
  std::vector<LeafSet> points;
  for (std::int64_t o = 1; o <= tree_size(fam.outer_depth); ++o)
    points.push_back(fam.point_set(o));
  for (std::int64_t oi = 1; oi <= tree_size(fam.outer_depth); ++oi) {
    DyadicInterval I = interval_from_order(oi);
    for (std::int64_t oj = 1; oj <= tree_size(fam.outer_depth); ++oj) {
      DyadicInterval I0 = interval_from_order(oj);
      if (!I.contains(I0)) continue;
      const LeafSet& B0 = points[static_cast<std::size_t>(oj - 1)];
      const LeafSet& BI = points[static_cast<std::size_t>(oi - 1)];
      if (B0.empty() || BI.empty()) continue;
      for (const auto& K : fam.collection(oi).items) {
        LeafSet KS = LeafSet::from_interval(K, N);
        const std::int64_t inter = KS.intersect_count(B0);
        if (inter == 0) {
          out.finite = false;
          return out;
        }
        bigrational v(bigint(B0.count()) * KS.count(), bigint(BI.count()) * inter);
        if (v > out.value) out.value = v;
      }
    }
  }
  return out;
}

// --- random Jones-compatible block family by halving descent ---

namespace detail {

inline void stop_descent(const DyadicInterval& root, int floor_level, int cap,
                         std::mt19937_64& g, IntervalCollection& out) {
  if (root.level >= cap || (root.level >= floor_level && unif(g) < 0.4)) {
    out.insert(root);
    return;
  }
  stop_descent(root.child(false), floor_level, cap, g, out);
  stop_descent(root.child(true), floor_level, cap, g, out);
}

}  // namespace detail

// Members of each collection tile halves of the parent's members (whole
// interval for the root); optional thinning removes members while keeping at
// least one inside every half, so the compatibility constant stays finite
// but moves above 1. Each outer generation draws its members from its own
// band of levels; the bands partition [0, N] so any n <= N fits.
inline BlockBasisFamily random_jones_family(int n, int N, std::uint64_t seed,
                                            bool thin = true, bool random_signs = true) {
  if (n > N) throw std::invalid_argument("random_jones_family: outer depth exceeds inner depth");
  auto g = make_rng(seed);
  BlockBasisFamily fam(n, N);
  const int spread = (N - n) / (n + 1);
  std::vector<int> lo(static_cast<std::size_t>(n) + 1), hi(static_cast<std::size_t>(n) + 1);
  for (int gen = 0; gen <= n; ++gen) {
    lo[gen] = gen == 0 ? 0 : hi[gen - 1] + 1;
    // keep one level in reserve per remaining generation
    hi[gen] = std::min(lo[gen] + spread, N - (n - gen));
  }
  for (std::int64_t o = 1; o <= tree_size(n); ++o) {
    DyadicInterval I0 = interval_from_order(o);
    std::vector<DyadicInterval> targets;
    if (o == 1) {
      targets.push_back(DyadicInterval{0, 1});
    } else {
      const bool side = I0.is_right_child();
      for (const auto& K : fam.collection(I0.parent().order()).items)
        targets.push_back(K.half(side));
    }
    const int gen = I0.level;
    IntervalCollection coll;
    for (const auto& t : targets) {
      IntervalCollection part;
      detail::stop_descent(t, std::max(lo[gen], t.level), hi[gen], g, part);
      if (thin && part.size() > 1) {
        std::vector<DyadicInterval> keep;
        for (const auto& K : part.items)
          if (keep.empty() || unif(g) < 0.75) keep.push_back(K);
        part.items = keep;
      }
      for (const auto& K : part.items) coll.insert(K);
    }
    for (const auto& K : coll.items)
      if (random_signs && unif(g) < 0.5)
        fam.signs[static_cast<std::size_t>(K.order() - 1)] = -1;
    fam.collection(o) = coll;
  }
  return fam;
}

// --- nested families of dyadic intervals (always nested-or-disjoint) ---

inline NestedFamily random_interval_family(int resolution, std::uint64_t seed,
                                           int count, int chains) {
  auto g = make_rng(seed);
  NestedFamily X;
  X.resolution = resolution;
  for (int i = 0; i < count; ++i) {
    const int lvl = static_cast<int>(unif(g) * (resolution + 1));
    const std::int64_t pos = 1 + static_cast<std::int64_t>(unif(g) * pow2ll(lvl));
    X.sets.push_back(LeafSet::from_interval(DyadicInterval{lvl, pos}, resolution));
  }
  for (int c = 0; c < chains; ++c) {
    const std::int64_t leaf = static_cast<std::int64_t>(unif(g) * pow2ll(resolution));
    DyadicInterval L{resolution, leaf + 1};
    const int top = static_cast<int>(unif(g) * resolution);
    for (int lvl = top; lvl <= resolution; ++lvl)
      X.sets.push_back(LeafSet::from_interval(L.ancestor_at(lvl), resolution));
  }
  if (X.sets.empty()) X.sets.push_back(LeafSet::full(resolution));
  return X;
}

inline NestedFamily perfect_tree_family(int depth, int resolution) {
  NestedFamily X;
  X.resolution = resolution;
  for (std::int64_t o = 1; o <= tree_size(depth); ++o)
    X.sets.push_back(LeafSet::from_interval(interval_from_order(o), resolution));
  return X;
}

}  // namespace tsup
