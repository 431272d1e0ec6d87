#include "haarfactor/quasidiag.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "haarfactor/errors.hpp"

namespace hf {

Schedule Schedule::adaptive(double eta, double gamma) {
  Schedule s;
  s.mode = Mode::Adaptive;
  s.eta = eta;
  s.gamma = gamma;
  return s;
}

Schedule Schedule::adaptive_explicit(std::vector<double> rho, std::vector<double> tau,
                                     double gamma) {
  Schedule s;
  s.mode = Mode::Adaptive;
  s.gamma = gamma;
  s.rho = std::move(rho);
  s.tau = std::move(tau);
  return s;
}

double Schedule::rho_at(std::int64_t step) const {
  if (mode == Mode::Paper) {
    return rho_exact.at(static_cast<std::size_t>(step - 1)).convert_to<double>();
  }
  if (!rho.empty())
    return rho[std::min<std::size_t>(static_cast<std::size_t>(step - 1), rho.size() - 1)];
  return eta * std::ldexp(1.0, static_cast<int>(-step));
}

double Schedule::tau_at(std::int64_t step, int r_min, double gamma_hat) const {
  if (mode == Mode::Paper) {
    if (!tau_representable.at(static_cast<std::size_t>(step - 1)))
      throw StructuredFailure("schedule.tau", "threshold too small to represent",
                              {{"step", static_cast<double>(step)}});
    return tau_exact.at(static_cast<std::size_t>(step - 1)).convert_to<double>();
  }
  if (!tau.empty())
    return tau[std::min<std::size_t>(static_cast<std::size_t>(step - 1), tau.size() - 1)];
  // 2 eta 8^{-step} 2^{-r_min} / gamma
  return eta * std::ldexp(1.0, static_cast<int>(1 - 3 * step - r_min)) / gamma_hat;
}

Schedule paper_schedule(int n, double gamma, double eta, std::size_t max_bits) {
  if (!(gamma > 0.0)) throw std::invalid_argument("paper_schedule: gamma must be positive");
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("paper_schedule: eta out of (0,1]");
  Schedule s;
  s.mode = Schedule::Mode::Paper;
  s.eta = eta;
  s.gamma = gamma;
  std::int64_t steps = tree_size(n);
  bigrational eta_r = rational_from_double(eta);
  bigrational gamma_r = rational_from_double(gamma);

  s.m.resize(static_cast<std::size_t>(steps));
  s.rho_exact.resize(static_cast<std::size_t>(steps));
  s.tau_exact.resize(static_cast<std::size_t>(steps));
  s.tau_representable.assign(static_cast<std::size_t>(steps), false);

  s.m[0] = 0;
  for (std::int64_t i = 1; i <= steps; ++i)
    s.rho_exact[static_cast<std::size_t>(i - 1)] =
        eta_r / bigrational(bigint(1) << static_cast<unsigned>(i));

  // Step 1 faces no interaction weight yet, so its threshold is only needed
  // for bookkeeping; the i = 1 instance of the formula with a zero-width
  // prior window supplies it.
  s.tau_exact[0] = eta_r / (bigrational(8) * gamma_r);
  s.tau_representable[0] = true;

  for (std::int64_t i = 2; i <= steps; ++i) {
    const bigint& m_prev = s.m[static_cast<std::size_t>(i - 2)];
    // tau_i = eta 8^{-i} 2^{-m_{i-1}} / gamma, window term floor(4 / (rho_i^2 tau_i^2))
    bigrational c = eta_r / (bigrational(bigint(1) << static_cast<unsigned>(3 * i)) * gamma_r);
    if (m_prev <= bigint(static_cast<std::int64_t>(max_bits))) {
      unsigned mp = m_prev.convert_to<unsigned>();
      s.tau_exact[static_cast<std::size_t>(i - 1)] = c / bigrational(bigint(1) << mp);
      s.tau_representable[static_cast<std::size_t>(i - 1)] = true;
    }
    bigint two_m = 2 * m_prev;
    bigrational q = bigrational(4) / (s.rho_exact[static_cast<std::size_t>(i - 1)] *
                                      s.rho_exact[static_cast<std::size_t>(i - 1)] * c * c);
    bigint q_num = boost::multiprecision::numerator(q);
    bigint q_den = boost::multiprecision::denominator(q);
    bigint budget(static_cast<std::int64_t>(max_bits));
    if (two_m + bigint(static_cast<std::int64_t>(boost::multiprecision::msb(q_num) + 1)) > budget)
      throw StructuredFailure(
          "paper_schedule.overflow",
          "window term needs more bits than the budget allows",
          {{"step", static_cast<double>(i)},
           {"max_bits", static_cast<double>(max_bits)}});
    bigint window = (q_num << two_m.convert_to<unsigned>()) / q_den;
    s.m[static_cast<std::size_t>(i - 1)] = m_prev + 1 + window;
  }
  s.depth_required = s.m[static_cast<std::size_t>(steps - 1)];
  return s;
}

double sign_quadratic(const IntervalCollection& coll, const std::vector<std::int8_t>& eps,
                      const HaarOperator& T) {
  if (eps.size() != coll.size()) throw std::invalid_argument("sign_quadratic: size mismatch");
  double x = 0.0;
  for (std::size_t a = 0; a < coll.size(); ++a)
    for (std::size_t b = 0; b < coll.size(); ++b) {
      if (a == b) continue;
      const DyadicInterval& Ka = coll.items[a];
      const DyadicInterval& Kb = coll.items[b];
      double c = T.entry(Kb, Ka) * std::ldexp(1.0, -Kb.level);
      x += static_cast<double>(eps[a]) * static_cast<double>(eps[b]) * c;
    }
  return x;
}

std::vector<std::int8_t> choose_signs(const IntervalCollection& coll, const HaarOperator& T) {
  std::size_t m = coll.size();
  std::vector<std::int8_t> eps(m, 1);
  if (m < 2) return eps;

  // c[a][b] = pairing of the off-diagonal part of the image of h_{K_a}
  // against h_{K_b}
  std::vector<std::vector<double>> c(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (a != b)
        c[a][b] = T.entry(coll.items[b], coll.items[a]) *
                  std::ldexp(1.0, -coll.items[b].level);

  auto pair_weight = [&c](std::size_t s, std::size_t t) { return c[s][t] + c[t][s]; };

  if (m <= 20) {
    // exhaustive scan in Gray code order, tracking flip marginals
    std::vector<double> marg(m, 0.0);
    double x = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        if (a != b) x += c[a][b];
    for (std::size_t t = 0; t < m; ++t)
      for (std::size_t b = 0; b < m; ++b)
        if (b != t) marg[t] += pair_weight(t, b);
    std::vector<std::int8_t> cur(m, 1), best(m, 1);
    double best_x = x;
    std::uint64_t total = std::uint64_t(1) << m;
    for (std::uint64_t g = 1; g < total; ++g) {
      unsigned t = static_cast<unsigned>(__builtin_ctzll(g));
      double et = static_cast<double>(cur[t]);
      x -= 2.0 * et * marg[t];
      cur[t] = static_cast<std::int8_t>(-cur[t]);
      for (std::size_t s = 0; s < m; ++s)
        if (s != t) marg[s] -= 2.0 * et * pair_weight(s, t);
      if (x > best_x) {
        best_x = x;
        best = cur;
      }
    }
    return best;
  }

  // conditional expectation, heaviest interactions first
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::vector<double> weight(m, 0.0);
  for (std::size_t t = 0; t < m; ++t)
    for (std::size_t b = 0; b < m; ++b)
      if (b != t) weight[t] += std::abs(c[t][b]) + std::abs(c[b][t]);
  std::stable_sort(order.begin(), order.end(),
                   [&weight](std::size_t a, std::size_t b) { return weight[a] > weight[b]; });
  std::vector<bool> assigned(m, false);
  for (std::size_t t : order) {
    double g = 0.0;
    for (std::size_t s = 0; s < m; ++s)
      if (assigned[s]) g += static_cast<double>(eps[s]) * pair_weight(t, s);
    eps[t] = g >= 0.0 ? 1 : -1;
    assigned[t] = true;
  }
  return eps;
}

namespace {

struct DescentConfig {
  const Schedule* sched = nullptr;
  double gamma_hat = 1.0;
  int depth = 0;
  bool paper = false;
};

int paper_r_min(const Schedule& s, std::int64_t i0) {
  if (i0 == 1) return 0;
  return s.m[static_cast<std::size_t>(i0 - 2)].convert_to<int>() + 1;
}

int paper_cap(const Schedule& s, std::int64_t i0) {
  return s.m[static_cast<std::size_t>(i0 - 1)].convert_to<int>();
}

}  // namespace

QuasiDiagResult quasi_diagonalize(const HaarOperator& T, int n, const Schedule& sched,
                                  double delta) {
  if (!T.square()) throw std::invalid_argument("quasi_diagonalize: operator not square");
  if (n < 0) throw std::invalid_argument("quasi_diagonalize: n < 0");
  if (delta < 0.0) throw std::invalid_argument("quasi_diagonalize: delta < 0");
  int N = T.depth();
  std::int64_t steps = tree_size(n);

  if (sched.mode == Schedule::Mode::Paper) {
    if (sched.m.size() != static_cast<std::size_t>(steps))
      throw std::invalid_argument("quasi_diagonalize: schedule built for a different n");
    if (sched.depth_required > bigint(N))
      throw StructuredFailure(
          "quasi_diagonalize.depth",
          "operator depth is below the schedule requirement",
          {{"depth", static_cast<double>(N)},
           {"required_log2", static_cast<double>(boost::multiprecision::msb(
                                 sched.depth_required == 0 ? bigint(1)
                                                           : sched.depth_required))}});
  }
  if (delta > 0.0 && !has_large_diagonal(T, delta))
    throw StructuredFailure("quasi_diagonalize.precondition",
                            "operator diagonal falls below delta", {{"delta", delta}});

  QuasiDiagResult res;
  res.delta = delta;
  res.eta_target = sched.eta;
  res.normalization_signs.assign(static_cast<std::size_t>(tree_size(N)), 1);
  HaarOperator Tn = delta > 0.0 ? normalize_diagonal(T, res.normalization_signs) : T;
  HaarOperator Tadj = adjoint(Tn);
  double gamma_hat = sched.gamma > 0.0 ? sched.gamma : std::max(1.0, opnorm_upper(Tn));
  res.gamma_hat = gamma_hat;

  int cap_adaptive = sched.level_cap >= 0 ? std::min(sched.level_cap, N) : N;
  bool paper = sched.mode == Schedule::Mode::Paper;

  res.family = BlockBasisFamily(n, N);
  std::vector<HaarVector> b(static_cast<std::size_t>(steps) + 1);
  std::vector<HaarVector> tb(static_cast<std::size_t>(steps) + 1);
  std::vector<HaarVector> tab(static_cast<std::size_t>(steps) + 1);
  int max_level_used = -1;

  for (std::int64_t i0 = 1; i0 <= steps; ++i0) {
    QuasiDiagStep step;
    step.order = i0;
    DyadicInterval I0 = interval_from_order(i0);
    step.interval = I0;
    int r_min = paper ? paper_r_min(sched, i0) : max_level_used + 1;
    int cap = paper ? std::min(paper_cap(sched, i0), N) : cap_adaptive;
    step.r_min = r_min;

    std::vector<DyadicInterval> targets;
    if (i0 == 1) {
      targets.push_back(DyadicInterval{0, 1});
    } else {
      bool side = I0.is_right_child();
      for (const auto& K : res.family.collection(I0.parent().order()).items)
        targets.push_back(K.half(side));
    }

    std::vector<HaarVector> fs, gs;
    for (std::int64_t j = 1; j < i0; ++j) {
      double Sj = std::ldexp(gamma_hat, static_cast<int>(j) + r_min);
      fs.push_back(scale(tb[static_cast<std::size_t>(j)], 1.0 / Sj));
      gs.push_back(scale(tab[static_cast<std::size_t>(j)], 1.0 / Sj));
    }
    FrequencyWeight w = frequency_weight(fs, gs, N);
    for (const HaarVector& f : fs) step.hyp_f_sum += sl_inf_norm(f);
    for (const HaarVector& g : gs) step.hyp_g_sum += h1_norm(g);

    double rho_i = sched.rho_at(i0);
    double tau_i = sched.tau_at(i0, r_min, gamma_hat);
    step.rho_used = rho_i;

    // Auto mode starts from the closed-form threshold, which only succeeds
    // inside enormous level windows; relaxing it geometrically finds the
    // tightest threshold the available depth supports. Every later bound is
    // computed from the threshold actually used, so nothing is overstated.
    const bool greedy_tau = !paper && sched.auto_tau();

    IntervalCollection coll;
    for (;;) {
      coll = IntervalCollection{};
      step.chosen_levels.clear();
      step.min_coverage = 1.0;
      bool exhausted = false;
      for (const auto& K1 : targets) {
        LevelCover lc;
        try {
          lc = select_level_cover(K1, w, tau_i, rho_i, std::max(r_min, K1.level), cap);
        } catch (const StructuredFailure& e) {
          if (greedy_tau && tau_i < 0x1p60) {
            exhausted = true;
            break;
          }
          auto data = e.data();
          data["step"] = static_cast<double>(i0);
          data["target_order"] = static_cast<double>(K1.order());
          throw StructuredFailure("quasi_diagonalize.select", e.what(), data);
        }
        for (const auto& K : lc.good.items) coll.insert(K);
        step.chosen_levels.push_back(lc.k);
        step.min_coverage = std::min(step.min_coverage, lc.coverage);
      }
      if (!exhausted) break;
      tau_i *= 2.0;
    }
    step.tau_used = tau_i;
    step.members = static_cast<std::int64_t>(coll.size());

    std::vector<std::int8_t> eps;
    if (delta > 0.0)
      eps = choose_signs(coll, Tn);
    else
      eps.assign(coll.size(), 1);
    step.sign_quadratic = sign_quadratic(coll, eps, Tn);

    res.family.collection(i0) = coll;
    for (std::size_t k = 0; k < coll.size(); ++k)
      res.family.signs[static_cast<std::size_t>(coll.items[k].order() - 1)] = eps[k];

    max_level_used = std::max(max_level_used, coll.max_level());

    b[static_cast<std::size_t>(i0)] = res.family.block_vector(i0);
    tb[static_cast<std::size_t>(i0)] = apply(Tn, b[static_cast<std::size_t>(i0)]);
    tab[static_cast<std::size_t>(i0)] = apply(Tadj, b[static_cast<std::size_t>(i0)]);

    step.l2_sq = l2_norm_sq(b[static_cast<std::size_t>(i0)]);
    step.measure_floor =
        std::ldexp(static_cast<double>(res.family.point_count(i0)), I0.level - N);
    step.diag_value = pairing(tb[static_cast<std::size_t>(i0)], b[static_cast<std::size_t>(i0)]);
    double sum = 0.0;
    for (std::int64_t j = 1; j < i0; ++j) {
      sum += std::abs(pairing(tb[static_cast<std::size_t>(j)], b[static_cast<std::size_t>(i0)]));
      sum += std::abs(pairing(tab[static_cast<std::size_t>(j)], b[static_cast<std::size_t>(i0)]));
    }
    step.offdiag_sum = sum;
    step.offdiag_bound =
        i0 == 1 ? 0.0
                : std::ldexp(gamma_hat, static_cast<int>(i0) - 1 + r_min) * tau_i * step.l2_sq;
    res.log.push_back(std::move(step));
  }

  res.achieved_eta = 0.0;
  for (const auto& st : res.log) {
    if (st.l2_sq <= 0.0) continue;
    double r = std::ldexp(st.offdiag_sum, 2 * static_cast<int>(st.order)) / st.l2_sq;
    res.achieved_eta = std::max(res.achieved_eta, r);
  }
  return res;
}

std::vector<double> QuasiDiagResult::offdiag_sums() const {
  std::vector<double> v;
  for (const auto& s : log) v.push_back(s.offdiag_sum);
  return v;
}
std::vector<double> QuasiDiagResult::diag_values() const {
  std::vector<double> v;
  for (const auto& s : log) v.push_back(s.diag_value);
  return v;
}
std::vector<double> QuasiDiagResult::measure_floors() const {
  std::vector<double> v;
  for (const auto& s : log) v.push_back(s.measure_floor);
  return v;
}
std::vector<double> QuasiDiagResult::block_l2_sqs() const {
  std::vector<double> v;
  for (const auto& s : log) v.push_back(s.l2_sq);
  return v;
}

AnnihilatingResult annihilating_basis(int depth, int n,
                                      const std::vector<HaarVector>& span_basis,
                                      double eta, const Schedule& sched) {
  if (n < 0 || depth < 0) throw std::invalid_argument("annihilating_basis: bad depths");
  if (!(eta > 0.0) || eta >= 1.0)
    throw std::invalid_argument("annihilating_basis: eta out of (0,1)");
  std::int64_t steps = tree_size(n);

  // orthonormalize the spanning set for the integral pairing
  std::vector<HaarVector> U;
  for (const HaarVector& v0 : span_basis) {
    HaarVector v = zero_pad(v0, depth);
    for (const HaarVector& u : U) v = subtract(v, scale(u, pairing(v, u)));
    double nn = l2_norm_sq(v);
    if (nn > 1e-20) U.push_back(scale(v, 1.0 / std::sqrt(nn)));
  }

  AnnihilatingResult res;

  // eta/2 net of the unit sphere: coefficient grid over the orthonormal
  // basis, mesh small enough that normalized grid points are eta/2 close
  if (!U.empty()) {
    std::vector<double> usl;
    double sum_sl = 0.0;
    for (const HaarVector& u : U) {
      usl.push_back(sl_inf_norm(u));
      sum_sl += usl.back();
    }
    double h = eta / (2.0 * sum_sl);
    double e1 = eta / 4.0;
    std::int64_t per_axis = static_cast<std::int64_t>(std::floor(2.0 / h)) + 1;
    double total = std::pow(static_cast<double>(per_axis), static_cast<double>(U.size()));
    if (total > 2.0e5)
      throw StructuredFailure("annihilating_basis.budget",
                              "net size exceeds the evaluation budget",
                              {{"per_axis", static_cast<double>(per_axis)},
                               {"dimension", static_cast<double>(U.size())},
                               {"budget", 2.0e5}});
    std::vector<std::int64_t> idx(U.size(), 0);
    std::vector<std::vector<double>> seen;
    while (true) {
      HaarVector g(depth);
      for (std::size_t i = 0; i < U.size(); ++i) {
        double ci = -1.0 + static_cast<double>(idx[i]) * h;
        if (ci != 0.0) g = add(g, scale(U[i], ci));
      }
      double nsl = sl_inf_norm(g);
      if (std::abs(nsl - 1.0) <= e1 && nsl > 0.0) {
        HaarVector cand = scale(g, 1.0 / nsl);
        std::vector<double> key;
        for (double c : cand.coeffs) key.push_back(std::round(c * 1e9));
        if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
          seen.push_back(key);
          res.net.push_back(cand);
        }
      }
      std::size_t d = 0;
      while (d < idx.size() && ++idx[d] >= per_axis) {
        idx[d] = 0;
        ++d;
      }
      if (d == idx.size()) break;
    }
  }

  // static level weight from the net; constant threshold chosen so the
  // square function of any projected net member stays below (eta/2)^2
  FrequencyWeight w = frequency_weight(res.net, {}, depth);
  double tau_star = eta / (2.0 * std::sqrt(static_cast<double>(steps)));
  res.tau_used = tau_star;

  res.family = BlockBasisFamily(n, depth);
  int max_level_used = -1;
  for (std::int64_t i0 = 1; i0 <= steps; ++i0) {
    QuasiDiagStep step;
    step.order = i0;
    DyadicInterval I0 = interval_from_order(i0);
    step.interval = I0;
    int r_min = max_level_used + 1;
    step.r_min = r_min;
    double rho_i = sched.rho_at(i0);
    step.rho_used = rho_i;
    step.tau_used = tau_star;

    std::vector<DyadicInterval> targets;
    if (i0 == 1) {
      targets.push_back(DyadicInterval{0, 1});
    } else {
      bool side = I0.is_right_child();
      for (const auto& K : res.family.collection(I0.parent().order()).items)
        targets.push_back(K.half(side));
    }
    IntervalCollection coll;
    step.min_coverage = 1.0;
    for (const auto& K1 : targets) {
      LevelCover lc;
      try {
        lc = select_level_cover(K1, w, tau_star, rho_i, std::max(r_min, K1.level), depth);
      } catch (const StructuredFailure& e) {
        auto data = e.data();
        data["step"] = static_cast<double>(i0);
        data["target_order"] = static_cast<double>(K1.order());
        throw StructuredFailure("annihilating_basis.select", e.what(), data);
      }
      for (const auto& K : lc.good.items) coll.insert(K);
      step.chosen_levels.push_back(lc.k);
      step.min_coverage = std::min(step.min_coverage, lc.coverage);
    }
    step.members = static_cast<std::int64_t>(coll.size());
    res.family.collection(i0) = coll;
    max_level_used = std::max(max_level_used, coll.max_level());
    step.l2_sq = res.family.block_l2_sq(i0);
    step.measure_floor =
        std::ldexp(static_cast<double>(res.family.point_count(i0)), I0.level - depth);
    res.log.push_back(std::move(step));
  }

  res.kappa_measured = verify_jones(res.family).kappa_measured;
  res.projection = compose(embed_blocks(res.family), project_blocks(res.family));
  for (const HaarVector& f : res.net)
    res.net_residuals.push_back(sl_inf_norm(apply(res.projection, f)));
  return res;
}

}  // namespace hf
