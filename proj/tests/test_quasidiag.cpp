#include <doctest.h>

#include <cmath>

#include <haarfactor/quasidiag.hpp>

#include "support.hpp"

using namespace hf;
using namespace tsup;

TEST_CASE("schedule parameter lists broadcast their last entry") {
  Schedule s = Schedule::adaptive_explicit({0.1, 0.2}, {0.3}, 2.0);
  CHECK_FALSE(s.auto_rho());
  CHECK_FALSE(s.auto_tau());
  CHECK(s.rho_at(1) == 0.1);
  CHECK(s.rho_at(2) == 0.2);
  CHECK(s.rho_at(7) == 0.2);
  CHECK(s.tau_at(1, 0, 1.0) == 0.3);
  CHECK(s.tau_at(9, 5, 7.0) == 0.3);

  Schedule a = Schedule::adaptive(0.25);
  CHECK(a.auto_rho());
  CHECK(a.auto_tau());
  CHECK(a.rho_at(1) == 0.125);
  CHECK(a.rho_at(3) == 0.25 * std::ldexp(1.0, -3));
  CHECK(a.tau_at(2, 3, 2.0) == std::ldexp(1.0, -11));
}

TEST_CASE("the closed-form schedule for a single block is flat") {
  Schedule s = paper_schedule(0, 2.0, 0.25);
  REQUIRE(s.m.size() == 1);
  CHECK(s.m[0] == 0);
  CHECK(s.depth_required == 0);
  CHECK(s.rho_exact[0] == bigrational(1, 8));
  CHECK(s.tau_representable[0]);
  CHECK(s.tau_exact[0] == bigrational(1, 64));
  CHECK(s.rho_at(1) == 0.125);
  CHECK(s.tau_at(1, 99, 99.0) == 0.015625);
}

TEST_CASE("the closed-form windows grow by the exact floor recurrence") {
  Schedule s = paper_schedule(1, 1.0, 0.25, 1u << 28);
  REQUIRE(s.m.size() == 3);
  CHECK(s.m[0] == 0);

  // recompute step 2 independently: rho_2 = eta/4, tau_2 = eta/(64 gamma),
  // window = floor(4 / (rho_2^2 tau_2^2))
  bigrational rho2(1, 16), tau2(1, 256);
  bigrational q = bigrational(4) / (rho2 * rho2 * tau2 * tau2);
  bigint window2 = boost::multiprecision::numerator(q) /
                   boost::multiprecision::denominator(q);
  CHECK(s.m[1] == window2 + 1);
  CHECK(s.m[1] == bigint(67108865));
  CHECK(s.rho_exact[1] == rho2);
  CHECK(s.tau_exact[1] == tau2);
  CHECK(s.tau_representable[1]);

  // step 3 is astronomically deep: tau_3 = eta 8^{-3} 2^{-m_2}, so the
  // window is 4 rho_3^{-2} tau_3^{-2} = 2^{12 + 2 (11 + m_2)}
  const std::int64_t m2 = 67108865;
  CHECK(s.tau_representable[2]);
  CHECK(boost::multiprecision::msb(s.depth_required) == 12 + 2 * (11 + m2));

  // the default bit budget refuses to materialize that window
  try {
    paper_schedule(1, 1.0, 0.25);
    FAIL("expected an overflow failure");
  } catch (const StructuredFailure& e) {
    CHECK(e.stage() == "paper_schedule.overflow");
    CHECK(e.data().at("step") == 3.0);
  }

  CHECK_THROWS_AS(paper_schedule(1, 0.0, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(paper_schedule(1, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("the single-block closed-form run selects the whole unit interval") {
  HaarOperator T = random_operator(4, {OperatorKind::DiagDominant, 0.5, 0.1, 0}, 3);
  Schedule s = paper_schedule(0, 4.0, 0.25);
  QuasiDiagResult res = quasi_diagonalize(T, 0, s, 0.5);
  REQUIRE(res.log.size() == 1);
  CHECK(res.family.collection(1).size() == 1);
  CHECK(res.family.collection(1).contains(DyadicInterval{0, 1}));
  CHECK(res.log[0].r_min == 0);
  CHECK(res.log[0].members == 1);
  CHECK(res.log[0].offdiag_sum == 0.0);
  CHECK(res.log[0].offdiag_bound == 0.0);
  CHECK(res.log[0].l2_sq == 1.0);
  CHECK(res.log[0].measure_floor == 1.0);
  CHECK(res.log[0].diag_value == doctest::Approx(std::abs(T.entry(
      DyadicInterval{0, 1}, DyadicInterval{0, 1}))));
  CHECK(res.achieved_eta == 0.0);
  CHECK(res.gamma_hat == 4.0);
}

TEST_CASE("a deeper closed-form schedule demands impossible depth") {
  HaarOperator T = HaarOperator::identity(10);
  Schedule s = paper_schedule(1, 1.0, 0.25, 1u << 28);
  try {
    quasi_diagonalize(T, 1, s, 0.5);
    FAIL("expected a depth failure");
  } catch (const StructuredFailure& e) {
    CHECK(e.stage() == "quasi_diagonalize.depth");
    CHECK(e.data().at("depth") == 10.0);
    CHECK(e.data().at("required_log2") == 12.0 + 2.0 * (11.0 + 67108865.0));
  }
  // and a schedule built for the wrong n is rejected outright
  CHECK_THROWS_AS(quasi_diagonalize(T, 2, s, 0.5), std::invalid_argument);
}

TEST_CASE("the identity is already diagonal: every interaction vanishes") {
  QuasiDiagResult res =
      quasi_diagonalize(HaarOperator::identity(6), 2, Schedule::adaptive(0.25), 0.5);
  CHECK(res.achieved_eta == 0.0);
  CHECK(res.log.size() == static_cast<std::size_t>(tree_size(2)));
  for (const auto& st : res.log) {
    CHECK(st.offdiag_sum == 0.0);
    CHECK(st.min_coverage == 1.0);
    CHECK(st.measure_floor == 1.0);
    CHECK(st.diag_value == st.l2_sq);
    CHECK(st.members >= 1);
  }
  CHECK(verify_jones(res.family).ok());
  for (std::int8_t sg : res.normalization_signs) CHECK(sg == 1);
}

TEST_CASE("disjoint blocks silence a diagonal operator exactly") {
  auto g = make_rng(64);
  std::vector<double> diag(static_cast<std::size_t>(tree_size(7)));
  for (double& d : diag) d = 0.5 + 0.5 * unif(g);
  HaarOperator T = HaarOperator::multiplier(diag, 7);
  QuasiDiagResult res = quasi_diagonalize(T, 1, Schedule::adaptive(0.25), 0.5);
  CHECK(res.achieved_eta == 0.0);
  for (const auto& st : res.log) {
    CHECK(st.offdiag_sum == 0.0);
    CHECK(st.diag_value >= 0.5 * st.l2_sq * (1.0 - 1e-12));
    CHECK(st.diag_value <= st.l2_sq * (1.0 + 1e-12));
  }
}

TEST_CASE("a diagonal below delta stops the construction before it starts") {
  std::vector<double> diag(static_cast<std::size_t>(tree_size(4)), 1.0);
  diag[5] = 0.25;
  HaarOperator T = HaarOperator::multiplier(diag, 4);
  try {
    quasi_diagonalize(T, 1, Schedule::adaptive(0.25), 0.5);
    FAIL("expected a precondition failure");
  } catch (const StructuredFailure& e) {
    CHECK(e.stage() == "quasi_diagonalize.precondition");
    CHECK(e.data().at("delta") == 0.5);
  }
  CHECK_THROWS_AS(
      quasi_diagonalize(HaarOperator(3, 2), 1, Schedule::adaptive(0.25), 0.5),
      std::invalid_argument);
  CHECK_THROWS_AS(
      quasi_diagonalize(HaarOperator::identity(3), -1, Schedule::adaptive(0.25), 0.5),
      std::invalid_argument);
  CHECK_THROWS_AS(
      quasi_diagonalize(HaarOperator::identity(3), 1, Schedule::adaptive(0.25), -0.5),
      std::invalid_argument);
}

TEST_CASE("adaptive runs keep every step inside its certified envelope") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL}) {
    HaarOperator T =
        random_operator(8, {OperatorKind::DiagDominant, 0.5, 0.02, 0}, seed);
    QuasiDiagResult res = quasi_diagonalize(T, 2, Schedule::adaptive(0.25), 0.5);
    REQUIRE(res.log.size() == static_cast<std::size_t>(tree_size(2)));
    int prev_max = -1;
    double recomputed = 0.0;
    for (const auto& st : res.log) {
      CHECK(st.members >= 1);
      CHECK(st.min_coverage >= 1.0 - st.rho_used - 1e-15);
      CHECK(st.offdiag_sum <= st.offdiag_bound * (1.0 + 1e-9) + 1e-12);
      CHECK(st.diag_value >= 0.5 * st.l2_sq * (1.0 - 1e-12));
      CHECK(st.r_min == prev_max + 1);
      for (int k : st.chosen_levels) {
        CHECK(k >= st.r_min);
        CHECK(k <= 8);
        prev_max = std::max(prev_max, k);
      }
      CHECK(st.measure_floor > 0.0);
      CHECK(st.measure_floor <= 1.0 + 1e-12);
      CHECK(st.l2_sq == doctest::Approx(res.family.block_l2_sq(st.order)));
      if (st.l2_sq > 0.0)
        recomputed = std::max(
            recomputed,
            std::ldexp(st.offdiag_sum, 2 * static_cast<int>(st.order)) / st.l2_sq);
      // the greedy threshold never tightens below the closed-form start
      if (st.order > 1) {
        double start =
            Schedule::adaptive(0.25).tau_at(st.order, st.r_min, res.gamma_hat);
        CHECK(st.tau_used >= start * (1.0 - 1e-12));
      }
    }
    CHECK(res.achieved_eta == recomputed);
    CHECK(verify_jones(res.family).ok());
    for (std::int8_t sg : res.normalization_signs) CHECK((sg == 1 || sg == -1));
  }
}

TEST_CASE("the sign search matches the exhaustive oracle on small collections") {
  auto g = make_rng(31);
  for (int t = 0; t < 20; ++t) {
    HaarOperator T =
        random_operator(5, {OperatorKind::DiagDominant, 0.4, 0.5, 0}, 800 + t);
    // random pairwise disjoint members at one level
    IntervalCollection coll;
    const int lvl = 3 + t % 3;
    for (std::int64_t p = 1; p <= pow2ll(lvl); ++p)
      if (unif(g) < 0.6 && coll.size() < 11) coll.insert(DyadicInterval{lvl, p});
    if (coll.size() < 2) continue;
    std::vector<std::int8_t> eps = choose_signs(coll, T);
    double got = sign_quadratic(coll, eps, T);
    CHECK(got == doctest::Approx(ref_best_sign_value(coll, T)).epsilon(1e-9));
    CHECK(got >= -1e-12);
    std::vector<int> e2(eps.begin(), eps.end());
    CHECK(got == doctest::Approx(ref_sign_value(coll, e2, T)).epsilon(1e-9));
  }
}

TEST_CASE("the marginal sign heuristic stays nonnegative on large collections") {
  HaarOperator T =
      random_operator(5, {OperatorKind::DiagDominant, 0.4, 0.5, 0}, 99);
  IntervalCollection coll;
  for (std::int64_t p = 1; p <= 22; ++p) coll.insert(DyadicInterval{5, p});
  std::vector<std::int8_t> eps = choose_signs(coll, T);
  CHECK(eps.size() == coll.size());
  double got = sign_quadratic(coll, eps, T);
  CHECK(got >= -1e-12);
  std::vector<std::int8_t> plain(coll.size(), 1);
  CHECK(got >= sign_quadratic(coll, plain, T) - 1e-12);
  CHECK_THROWS_AS(sign_quadratic(coll, std::vector<std::int8_t>(3, 1), T),
                  std::invalid_argument);
}

TEST_CASE("a block family can flatten a given direction to nothing") {
  Schedule s = Schedule::adaptive(0.25);
  AnnihilatingResult res = annihilating_basis(6, 1, {rademacher(0, 6)}, 0.25, s);
  CHECK(res.tau_used == doctest::Approx(0.25 / (2.0 * std::sqrt(3.0))));
  CHECK(res.net.size() == 2);
  REQUIRE(res.net_residuals.size() == res.net.size());
  for (double r : res.net_residuals) CHECK(r <= 0.25);
  CHECK(verify_jones(res.family).ok());
  CHECK(res.kappa_measured >= 1.0);
  // the first block dodges the root direction entirely
  CHECK_FALSE(res.family.collection(1).contains(DyadicInterval{0, 1}));
  // projection reproduces each block vector
  for (std::int64_t o = 1; o <= tree_size(1); ++o) {
    HaarVector b = res.family.block_vector(o);
    HaarVector pb = apply(res.projection, b);
    for (std::int64_t j = 1; j <= b.size(); ++j)
      CHECK(pb[j] == doctest::Approx(b[j]).epsilon(1e-10));
  }

  // too many spanning directions blow the net budget
  std::vector<HaarVector> big;
  for (int i = 0; i < 6; ++i) big.push_back(random_vector(6, 7000 + i));
  try {
    annihilating_basis(6, 1, big, 0.25, s);
    FAIL("expected a budget failure");
  } catch (const StructuredFailure& e) {
    CHECK(e.stage() == "annihilating_basis.budget");
  }
  CHECK_THROWS_AS(annihilating_basis(6, 1, big, 1.5, s), std::invalid_argument);
}
