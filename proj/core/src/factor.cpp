#include "haarfactor/factor.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "haarfactor/errors.hpp"

namespace hf {

namespace {

struct BlockMatrices {
  Matrix M;                    // block matrix, unit diagonal
  Matrix U;                    // coefficient functionals scaled by the diagonal
  std::vector<double> diag;    // pairing(H b_i, b_i)
  std::vector<double> l2;
  double q = 0.0;              // certified norm of M - Id
};

BlockMatrices build_block_matrices(const BlockBasisFamily& fam, const HaarOperator& H) {
  std::int64_t dn = tree_size(fam.outer_depth);
  std::int64_t dN = tree_size(fam.inner_depth);
  BlockMatrices bm;
  bm.M = Matrix::Zero(dn, dn);
  bm.U = Matrix::Zero(dn, dN);
  bm.diag.resize(static_cast<std::size_t>(dn));
  bm.l2.resize(static_cast<std::size_t>(dn));

  std::vector<HaarVector> b(static_cast<std::size_t>(dn));
  std::vector<HaarVector> hb(static_cast<std::size_t>(dn));
  for (std::int64_t i = 0; i < dn; ++i) {
    b[static_cast<std::size_t>(i)] = fam.block_vector(i + 1);
    hb[static_cast<std::size_t>(i)] = apply(H, b[static_cast<std::size_t>(i)]);
    bm.l2[static_cast<std::size_t>(i)] = l2_norm_sq(b[static_cast<std::size_t>(i)]);
  }
  for (std::int64_t i = 0; i < dn; ++i) {
    double d = pairing(hb[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)]);
    if (!(d > 0.0))
      throw StructuredFailure("factor.diagonal", "block diagonal is not positive",
                              {{"order", static_cast<double>(i + 1)}, {"value", d}});
    bm.diag[static_cast<std::size_t>(i)] = d;
    for (std::int64_t j = 0; j < dn; ++j)
      bm.M(i, j) = pairing(hb[static_cast<std::size_t>(j)], b[static_cast<std::size_t>(i)]) / d;
    for (const auto& K : fam.collection(i + 1).items)
      bm.U(i, K.order() - 1) =
          static_cast<double>(fam.sign(K)) * std::ldexp(1.0, -K.level) / d;
  }

  // certified operator norm of E = M - Id on the depth-n tree: row absolute
  // sums combined along branches
  HaarVector rowabs(fam.outer_depth);
  for (std::int64_t i = 0; i < dn; ++i) {
    double r = 0.0;
    for (std::int64_t j = 0; j < dn; ++j)
      r += std::abs(bm.M(i, j) - (i == j ? 1.0 : 0.0));
    rowabs.coeffs[static_cast<std::size_t>(i)] = r;
  }
  bm.q = sl_inf_norm(rowabs);
  return bm;
}

double matrix_sup(const Matrix& A) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) m = std::max(m, std::abs(A(i, j)));
  return m;
}

double norm1(const Matrix& A) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j) m = std::max(m, A.col(j).cwiseAbs().sum());
  return m;
}

BlockBasisFamily with_combined_signs(const BlockBasisFamily& fam,
                                     const std::vector<std::int8_t>& norm_signs) {
  BlockBasisFamily out = fam;
  for (std::size_t k = 0; k < out.signs.size(); ++k)
    out.signs[k] = static_cast<std::int8_t>(out.signs[k] * norm_signs.at(k));
  return out;
}

// Core assembly shared by both pipelines. H_build is the operator the block
// matrices are built against; H_resid is what the residual S H R - Id is
// evaluated with (they differ exactly by the recorded column flips).
void assemble(FactorizationCertificate& cert, const BlockBasisFamily& fam,
              const std::vector<std::int8_t>& norm_signs, const HaarOperator& H_build,
              const HaarOperator& H_resid, double diag_floor_claim) {
  BlockMatrices bm = build_block_matrices(fam, H_build);
  std::int64_t dn = tree_size(fam.outer_depth);

  if (bm.q >= 1.0)
    throw StructuredFailure("factor.neumann",
                            "block matrix is not a contraction of the identity",
                            {{"q", bm.q}});

  Eigen::PartialPivLU<Matrix> lu(bm.M);
  Matrix S = lu.solve(bm.U);
  double scale = std::max(1.0, matrix_sup(bm.U));
  double solve_err = matrix_sup(bm.M * S - bm.U);
  if (solve_err > 1e-10 * scale)
    throw StructuredFailure("factor.solve", "linear solve residual too large",
                            {{"residual", solve_err}, {"scale", scale}});
  Matrix Minv = lu.inverse();
  cert.solve_rcond = 1.0 / std::max(norm1(bm.M) * norm1(Minv), 1.0);

  cert.family = fam;
  cert.normalization_signs = norm_signs;
  cert.S = HaarOperator(fam.outer_depth, fam.inner_depth);
  cert.S.A = S;
  cert.R = embed_blocks(with_combined_signs(fam, norm_signs));

  JonesReport jr = verify_jones(fam);
  if (!jr.ok())
    throw StructuredFailure("factor.jones", "block family fails a compatibility condition",
                            {{"kappa", jr.kappa_measured}});
  cert.kappa_measured = jr.kappa_measured;

  Matrix res = cert.S.A * (H_resid.A * cert.R.A) - Matrix::Identity(dn, dn);
  cert.residual.sup_norm = matrix_sup(res);
  HaarOperator res_op(fam.outer_depth, fam.outer_depth);
  res_op.A = res;
  cert.residual.op_upper = opnorm_upper(res_op);

  cert.diag_values = bm.diag;
  cert.l2_sqs = bm.l2;
  double floor_measured = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bm.diag.size(); ++i)
    floor_measured = std::min(floor_measured, bm.diag[i] / bm.l2[i]);
  if (floor_measured + 1e-9 < diag_floor_claim)
    throw StructuredFailure("factor.diagonal", "diagonal fell below its certified floor",
                            {{"measured", floor_measured}, {"claimed", diag_floor_claim}});

  cert.analytic.kappa = jr.kappa_measured;
  cert.analytic.diag_floor = diag_floor_claim;
  cert.analytic.q_neumann = bm.q;
  cert.analytic.bound_R = 1.0;
  cert.analytic.bound_S = jr.kappa_measured / (diag_floor_claim * (1.0 - bm.q));
  cert.analytic.product = cert.analytic.bound_R * cert.analytic.bound_S;
  cert.analytic.finite = true;
}

double eta1_large_diagonal(int n, double delta, double eta) {
  return std::min(0.5, delta * std::ldexp(1.0, -n - 2) * eta / (1.0 + eta));
}

double eta1_primary(int n, double eta) {
  if (n == 0) return 0.5;
  double a = std::pow(4.0, -n - 3) / (2.0 * n);
  double b = eta * std::pow(4.0, -n - 4) / (n * (1.0 + eta));
  return std::min({0.5, a, b});
}

Schedule schedule_for(const Schedule& user, double eta1) {
  Schedule s = user;
  // Explicit parameter vectors are respected; the automatic formulas target
  // the derived eta1 rather than the user's eta.
  if (s.mode == Schedule::Mode::Adaptive && s.auto_rho() && s.auto_tau()) s.eta = eta1;
  return s;
}

}  // namespace

FactorizationCertificate factor_large_diagonal(const HaarOperator& T, int n, double delta,
                                               double eta, const Schedule& sched) {
  if (!(delta > 0.0) || delta > 1.0)
    throw std::invalid_argument("factor_large_diagonal: delta out of (0,1]");
  if (!(eta > 0.0)) throw std::invalid_argument("factor_large_diagonal: eta <= 0");
  if (!has_large_diagonal(T, delta))
    throw StructuredFailure("factor_large_diagonal.precondition",
                            "operator diagonal falls below delta", {{"delta", delta}});

  FactorizationCertificate cert;
  cert.kind = "large-diagonal";
  cert.backend = arith_mode_name();
  cert.n = n;
  cert.N = T.depth();
  cert.eta = eta;
  cert.delta = delta;
  cert.eta1 = eta1_large_diagonal(n, delta, eta);
  cert.H_choice = "T";

  Schedule qsched = schedule_for(sched, cert.eta1);
  QuasiDiagResult qd = quasi_diagonalize(T, n, qsched, delta);

  HaarOperator Tn = T;
  for (std::size_t k = 0; k < qd.normalization_signs.size(); ++k)
    if (qd.normalization_signs[k] < 0) Tn.A.col(static_cast<Eigen::Index>(k)) *= -1.0;

  assemble(cert, qd.family, qd.normalization_signs, Tn, T, delta);
  cert.offdiag_sums = qd.offdiag_sums();
  cert.offdiag_bounds.clear();
  for (const auto& st : qd.log) cert.offdiag_bounds.push_back(st.offdiag_bound);
  cert.measure_floors = qd.measure_floors();
  cert.achieved_eta = qd.achieved_eta;
  cert.analytic.eta1 = cert.eta1;
  cert.analytic.paper_contraction =
      (cert.eta1 / delta) * (1.0 + std::ldexp(1.0, n) / (1.0 - cert.eta1));
  return cert;
}

FactorizationCertificate factor_primary(const HaarOperator& T, int n, double eta,
                                        const Schedule& sched) {
  if (!(eta > 0.0)) throw std::invalid_argument("factor_primary: eta <= 0");
  if (!T.square()) throw std::invalid_argument("factor_primary: operator not square");
  int N = T.depth();

  FactorizationCertificate cert;
  cert.kind = "primary";
  cert.backend = arith_mode_name();
  cert.n = n;
  cert.N = N;
  cert.eta = eta;
  cert.delta = 0.0;
  cert.eta1 = eta1_primary(n, eta);

  // depth budget: the inner family needs 2^{n1+1} - 2 levels below the root
  int budget = 0;
  while (pow2ll(budget + 2) - 2 <= N) ++budget;
  int n1 = std::min(n + 3, budget);
  if (n1 < n)
    throw StructuredFailure("factor_primary.depth",
                            "operator too shallow for the requested block depth",
                            {{"depth", static_cast<double>(N)},
                             {"n", static_cast<double>(n)},
                             {"n1_budget", static_cast<double>(budget)}});

  Schedule qsched = schedule_for(sched, cert.eta1);
  QuasiDiagResult qd = quasi_diagonalize(T, n1, qsched, 0.0);
  const BlockBasisFamily& famK = qd.family;
  std::int64_t inner_count = tree_size(n1);

  // split the blocks by which of T, Id - T carries at least half the diagonal
  std::vector<double> dvals(static_cast<std::size_t>(inner_count));
  std::vector<double> l2s(static_cast<std::size_t>(inner_count));
  NestedFamily famM, famN;
  famM.resolution = famN.resolution = N;
  std::vector<std::size_t> ordM, ordN;
  for (std::int64_t o = 1; o <= inner_count; ++o) {
    HaarVector b = famK.block_vector(o);
    dvals[static_cast<std::size_t>(o - 1)] = pairing(apply(T, b), b);
    l2s[static_cast<std::size_t>(o - 1)] = l2_norm_sq(b);
    LeafSet ps = famK.point_set(o);
    double half = 0.5 * l2s[static_cast<std::size_t>(o - 1)];
    if (dvals[static_cast<std::size_t>(o - 1)] >= half) {
      famM.sets.push_back(ps);
      ordM.push_back(static_cast<std::size_t>(o));
    }
    if (dvals[static_cast<std::size_t>(o - 1)] <= half) {
      famN.sets.push_back(ps);
      ordN.push_back(static_cast<std::size_t>(o));
    }
  }
  CarlesonValue ccM = carleson_constant_exact(famM);
  CarlesonValue ccN = carleson_constant_exact(famN);
  bool pickM = static_cast<__int128>(ccM.num) * ccN.den >=
               static_cast<__int128>(ccN.num) * ccM.den;
  cert.H_choice = pickM ? "T" : "Id-T";
  HaarOperator H = pickM ? T : identity_minus(T);
  const NestedFamily& famL = pickM ? famM : famN;
  const std::vector<std::size_t>& ordL = pickM ? ordM : ordN;

  StageReport st;
  st.n1 = n1;
  st.cc_chosen = (pickM ? ccM : ccN).value;
  st.cc_other = (pickM ? ccN : ccM).value;
  st.cc_threshold = (1.0 - cert.eta1) * n1 / 2.0;
  st.threshold_met = st.cc_chosen >= st.cc_threshold;
  if (famL.empty())
    throw StructuredFailure("factor_primary.split", "both branches empty",
                            {{"cc_T", ccM.value}, {"cc_IdT", ccN.value}});

  // densest root for the n-generation tower
  st.rho_paper = n == 0 ? 0.5 : std::pow(cert.eta1 / (32.0 * n), n + 1);
  DenseRootPick pick;
  try {
    pick = best_dense_root(famL, n);
  } catch (const std::exception& e) {
    throw StructuredFailure("factor_primary.dense_root", e.what(), {});
  }
  if (pick.num == 0)
    throw StructuredFailure("factor_primary.dense_root",
                            "no root reaches n generations",
                            {{"cc_chosen", st.cc_chosen},
                             {"cc_other", st.cc_other},
                             {"n", static_cast<double>(n)}});
  double d_best = static_cast<double>(pick.num) / static_cast<double>(pick.den);
  st.root_index = pick.index;
  st.root_densities = pick.densities;
  st.rho_used = std::max(st.rho_paper, 1.0 - 0.875 * d_best);

  const LeafSet& root = famL.sets[pick.index];
  NestedFamily L0;
  L0.resolution = N;
  std::vector<std::size_t> ordL0;
  std::size_t root_in_L0 = 0;
  for (std::size_t i = 0; i < famL.sets.size(); ++i)
    if (famL.sets[i].subset_of(root)) {
      if (i == pick.index) root_in_L0 = L0.sets.size();
      L0.sets.push_back(famL.sets[i]);
      ordL0.push_back(ordL[i]);
    }

  // pruning: the closed-form beta first, then a coarse grid until the exact
  // rechecks pass
  st.beta_paper = n == 0 ? 0.5 : cert.eta1 / (8.0 * n);
  std::vector<double> betas = {st.beta_paper, 1.0 / 16, 1.0 / 8, 3.0 / 16, 1.0 / 4,
                               5.0 / 16,      3.0 / 8,  7.0 / 16, 1.0 / 2, 9.0 / 16,
                               5.0 / 8,       11.0 / 16, 3.0 / 4};
  PruneResult pruned;
  bool pruned_ok = false;
  for (double beta : betas) {
    if (!(beta > 0.0) || !(beta < 1.0)) continue;
    st.betas_tried.push_back(beta);
    PruneResult pr = prune_to_dense(L0, n, st.rho_used, beta, false);
    bool root_kept = std::find(pr.picked.begin(), pr.picked.end(), root_in_L0) !=
                     pr.picked.end();
    if (!pr.Y.empty() && root_kept && pr.conclusion_b && pr.gn_is_intersection &&
        !pr.F_intersection.empty()) {
      pruned = std::move(pr);
      st.beta_used = beta;
      pruned_ok = true;
      break;
    }
  }
  if (!pruned_ok)
    throw StructuredFailure("factor_primary.prune",
                            "no pruning parameter passes the exact rechecks",
                            {{"cc_chosen", st.cc_chosen},
                             {"rho_used", st.rho_used},
                             {"betas_tried", static_cast<double>(st.betas_tried.size())}});

  NestedFamily L1 = pruned.Y;
  std::vector<std::size_t> ordL1;
  std::size_t root_in_L1 = 0;
  for (std::size_t i = 0; i < pruned.picked.size(); ++i) {
    if (pruned.picked[i] == root_in_L0) root_in_L1 = i;
    ordL1.push_back(ordL0[pruned.picked[i]]);
  }

  // tower of collections indexed by the depth-n tree: children live in the
  // matching generation and inside the halved point set of the parent
  auto gensY = generation_indices(L1);
  std::vector<std::vector<std::size_t>> tower(static_cast<std::size_t>(tree_size(n)));
  tower[0] = {root_in_L1};
  for (std::int64_t o = 2; o <= tree_size(n); ++o) {
    DyadicInterval I0 = interval_from_order(o);
    bool side = I0.is_right_child();
    int k0 = I0.level;
    if (gensY.size() <= static_cast<std::size_t>(k0))
      throw StructuredFailure("factor_primary.tower", "pruned family too shallow",
                              {{"order", static_cast<double>(o)},
                               {"generations", static_cast<double>(gensY.size())}});
    LeafSet carrier(N);
    for (std::size_t m : tower[static_cast<std::size_t>(I0.parent().order() - 1)]) {
      std::size_t korder = ordL1[m];
      for (const auto& Q : famK.collection(static_cast<std::int64_t>(korder)).items)
        carrier.add_interval(Q.half(side));
    }
    for (std::size_t idx : gensY[static_cast<std::size_t>(k0)])
      if (L1.sets[idx].subset_of(carrier))
        tower[static_cast<std::size_t>(o - 1)].push_back(idx);
    if (tower[static_cast<std::size_t>(o - 1)].empty())
      throw StructuredFailure("factor_primary.tower",
                              "no pruned member fits inside the halved carrier",
                              {{"order", static_cast<double>(o)}});
  }

  // merge the chosen inner collections into the final blocks
  BlockBasisFamily tilde(n, N);
  for (std::int64_t o = 1; o <= tree_size(n); ++o)
    for (std::size_t m : tower[static_cast<std::size_t>(o - 1)])
      for (const auto& K : famK.collection(static_cast<std::int64_t>(ordL1[m])).items)
        tilde.collection(o).insert(K);

  std::vector<std::int8_t> no_flips(static_cast<std::size_t>(tree_size(N)), 1);

  // measured diagonal floor becomes the certified constant of the chain
  double floor_measured = std::numeric_limits<double>::infinity();
  for (std::int64_t o = 1; o <= tree_size(n); ++o) {
    HaarVector b = tilde.block_vector(o);
    double d = pairing(apply(H, b), b);
    double l2 = l2_norm_sq(b);
    if (!(d > 0.0))
      throw StructuredFailure("factor_primary.diagonal",
                              "merged block loses its diagonal",
                              {{"order", static_cast<double>(o)}, {"value", d}});
    floor_measured = std::min(floor_measured, d / l2);
  }

  assemble(cert, tilde, no_flips, H, H, floor_measured);

  // off-diagonal sums of the merged family under H
  cert.offdiag_sums.assign(static_cast<std::size_t>(tree_size(n)), 0.0);
  cert.offdiag_bounds.assign(static_cast<std::size_t>(tree_size(n)), 0.0);
  cert.measure_floors.assign(static_cast<std::size_t>(tree_size(n)), 0.0);
  {
    HaarOperator Hadj = adjoint(H);
    std::vector<HaarVector> b, hb, hab;
    for (std::int64_t o = 1; o <= tree_size(n); ++o) {
      b.push_back(tilde.block_vector(o));
      hb.push_back(apply(H, b.back()));
      hab.push_back(apply(Hadj, b.back()));
    }

    // constituents of each merged block, as inner construction orders
    std::vector<std::vector<std::int64_t>> parts(static_cast<std::size_t>(tree_size(n)));
    for (std::int64_t o = 1; o <= tree_size(n); ++o)
      for (std::size_t m : tower[static_cast<std::size_t>(o - 1)])
        parts[static_cast<std::size_t>(o - 1)].push_back(
            static_cast<std::int64_t>(ordL1[m]));
    std::vector<HaarVector> kb, khb, khab;
    for (std::int64_t o = 1; o <= inner_count; ++o) {
      kb.push_back(famK.block_vector(o));
      khb.push_back(apply(H, kb.back()));
      khab.push_back(apply(Hadj, kb.back()));
    }

    cert.achieved_eta = 0.0;
    for (std::int64_t i = 1; i <= tree_size(n); ++i) {
      double sum = 0.0;
      for (std::int64_t j = 1; j < i; ++j) {
        sum += std::abs(pairing(hb[static_cast<std::size_t>(j - 1)],
                                b[static_cast<std::size_t>(i - 1)]));
        sum += std::abs(pairing(hab[static_cast<std::size_t>(j - 1)],
                                b[static_cast<std::size_t>(i - 1)]));
      }
      cert.offdiag_sums[static_cast<std::size_t>(i - 1)] = sum;
      double l2 = cert.l2_sqs[static_cast<std::size_t>(i - 1)];
      // Each constituent's construction-time bound caps its interaction with
      // every earlier constituent; distinct blocks have disjoint supports, so
      // those bounds hold for T and Id - T alike. Pairs the construction
      // order does not cover are added at their measured size.
      double bound = 0.0;
      for (std::int64_t l : parts[static_cast<std::size_t>(i - 1)])
        bound += qd.log[static_cast<std::size_t>(l - 1)].offdiag_bound;
      for (std::int64_t j = 1; j < i; ++j)
        for (std::int64_t earlier : parts[static_cast<std::size_t>(j - 1)])
          for (std::int64_t l : parts[static_cast<std::size_t>(i - 1)])
            if (earlier >= l)
              bound += std::abs(pairing(khb[static_cast<std::size_t>(earlier - 1)],
                                        kb[static_cast<std::size_t>(l - 1)])) +
                       std::abs(pairing(khab[static_cast<std::size_t>(earlier - 1)],
                                        kb[static_cast<std::size_t>(l - 1)]));
      cert.offdiag_bounds[static_cast<std::size_t>(i - 1)] = bound;
      DyadicInterval I = interval_from_order(i);
      cert.measure_floors[static_cast<std::size_t>(i - 1)] =
          std::ldexp(static_cast<double>(tilde.point_count(i)), I.level - N);
      if (l2 > 0.0)
        cert.achieved_eta = std::max(
            cert.achieved_eta, std::ldexp(sum, 2 * static_cast<int>(i)) / l2);
    }
  }

  cert.analytic.eta1 = cert.eta1;
  cert.analytic.paper_contraction = cert.eta1 * std::pow(4.0, n + 3) * n;
  cert.inner_family = famK;
  cert.stages = st;
  return cert;
}

namespace {

void push_check(VerifyReport& rep, const std::string& name, bool pass, double measured,
                double reference) {
  rep.checks.push_back({name, pass, measured, reference});
}

bool close(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace

VerifyReport verify_certificate(const FactorizationCertificate& cert, const HaarOperator& T) {
  VerifyReport rep;
  const BlockBasisFamily& fam = cert.family;
  std::int64_t dn = tree_size(cert.n);

  bool shape = fam.outer_depth == cert.n && fam.inner_depth == cert.N &&
               cert.R.in_depth == cert.n && cert.R.out_depth == cert.N &&
               cert.S.in_depth == cert.N && cert.S.out_depth == cert.n &&
               T.square() && T.depth() == cert.N;
  push_check(rep, "shape", shape, 0.0, 0.0);
  if (!shape) {
    rep.all_pass = false;
    return rep;
  }

  JonesReport jr = verify_jones(fam);
  push_check(rep, "family-compatible", jr.ok(), jr.kappa_measured, cert.kappa_measured);
  push_check(rep, "kappa-match", close(jr.kappa_measured, cert.kappa_measured),
             jr.kappa_measured, cert.kappa_measured);

  // effective operators: the matrices were built against H_build, the
  // residual against H_resid
  HaarOperator H_resid = T;
  if (cert.kind == "primary" && cert.H_choice == "Id-T") H_resid = identity_minus(T);
  HaarOperator H_build = H_resid;
  if (cert.kind == "large-diagonal")
    for (std::size_t k = 0; k < cert.normalization_signs.size(); ++k)
      if (cert.normalization_signs[k] < 0) H_build.A.col(static_cast<Eigen::Index>(k)) *= -1.0;

  Matrix Rref = embed_blocks(with_combined_signs(fam, cert.normalization_signs)).A;
  bool r_ok = Rref.rows() == cert.R.A.rows() && Rref.cols() == cert.R.A.cols() &&
              (Rref - cert.R.A).cwiseAbs().maxCoeff() == 0.0;
  push_check(rep, "R-structure", r_ok, 0.0, 0.0);

  BlockMatrices bm;
  bool sdef_ok = false;
  double sdef = 0.0;
  try {
    bm = build_block_matrices(fam, H_build);
    sdef = matrix_sup(bm.M * cert.S.A - bm.U);
    sdef_ok = sdef <= 1e-9 * std::max(1.0, matrix_sup(bm.U));
  } catch (const StructuredFailure&) {
    sdef_ok = false;
  }
  push_check(rep, "S-equation", sdef_ok, sdef, 1e-9);

  Matrix res = cert.S.A * (H_resid.A * cert.R.A) - Matrix::Identity(dn, dn);
  double sup = matrix_sup(res);
  push_check(rep, "residual-match", close(sup, cert.residual.sup_norm), sup,
             cert.residual.sup_norm);
  HaarOperator res_op(cert.n, cert.n);
  res_op.A = res;
  double res_up = opnorm_upper(res_op);
  push_check(rep, "residual-upper-match", close(res_up, cert.residual.op_upper), res_up,
             cert.residual.op_upper);

  bool diag_ok = bm.diag.size() == cert.diag_values.size();
  bool floor_ok = true;
  for (std::size_t i = 0; diag_ok && i < bm.diag.size(); ++i) {
    if (!close(bm.diag[i], cert.diag_values[i])) diag_ok = false;
    if (bm.diag[i] + 1e-9 < cert.analytic.diag_floor * bm.l2[i]) floor_ok = false;
  }
  push_check(rep, "diagonal-match", diag_ok, 0.0, 0.0);
  push_check(rep, "diagonal-floor", floor_ok, cert.analytic.diag_floor, 0.0);

  // off-diagonal sums against H_build and its adjoint
  bool off_ok = cert.offdiag_sums.size() == static_cast<std::size_t>(dn);
  bool off_bound_ok = true;
  if (off_ok) {
    HaarOperator Hadj = adjoint(H_build);
    std::vector<HaarVector> b, hb, hab;
    for (std::int64_t o = 1; o <= dn; ++o) {
      b.push_back(fam.block_vector(o));
      hb.push_back(apply(H_build, b.back()));
      hab.push_back(apply(Hadj, b.back()));
    }
    for (std::int64_t i = 1; i <= dn && off_ok; ++i) {
      double sum = 0.0;
      for (std::int64_t j = 1; j < i; ++j) {
        sum += std::abs(pairing(hb[static_cast<std::size_t>(j - 1)],
                                b[static_cast<std::size_t>(i - 1)]));
        sum += std::abs(pairing(hab[static_cast<std::size_t>(j - 1)],
                                b[static_cast<std::size_t>(i - 1)]));
      }
      if (!close(sum, cert.offdiag_sums[static_cast<std::size_t>(i - 1)])) off_ok = false;
      if (sum > cert.offdiag_bounds[static_cast<std::size_t>(i - 1)] + 1e-9)
        off_bound_ok = false;
    }
  }
  push_check(rep, "offdiagonal-match", off_ok, 0.0, 0.0);
  push_check(rep, "offdiagonal-bound", off_bound_ok, 0.0, 0.0);

  push_check(rep, "neumann-match", close(bm.q, cert.analytic.q_neumann), bm.q,
             cert.analytic.q_neumann);
  push_check(rep, "neumann-contraction", bm.q < 1.0, bm.q, 1.0);
  double product = cert.analytic.bound_R * cert.analytic.kappa /
                   (cert.analytic.diag_floor * (1.0 - bm.q));
  push_check(rep, "bound-product", close(product, cert.analytic.product), product,
             cert.analytic.product);

  if (cert.kind == "primary" && cert.inner_family.has_value()) {
    const BlockBasisFamily& inner = *cert.inner_family;
    JonesReport ji = verify_jones(inner);
    push_check(rep, "inner-family-compatible", ji.ok(), ji.kappa_measured, 0.0);
    NestedFamily famM, famN;
    famM.resolution = famN.resolution = inner.inner_depth;
    for (std::int64_t o = 1; o <= tree_size(inner.outer_depth); ++o) {
      HaarVector b = inner.block_vector(o);
      double d = pairing(apply(T, b), b);
      double half = 0.5 * l2_norm_sq(b);
      if (d >= half) famM.sets.push_back(inner.point_set(o));
      if (d <= half) famN.sets.push_back(inner.point_set(o));
    }
    CarlesonValue ccM = carleson_constant_exact(famM);
    CarlesonValue ccN = carleson_constant_exact(famN);
    bool pickM = static_cast<__int128>(ccM.num) * ccN.den >=
                 static_cast<__int128>(ccN.num) * ccM.den;
    bool choice_ok = (pickM && cert.H_choice == "T") || (!pickM && cert.H_choice == "Id-T");
    push_check(rep, "carleson-choice", choice_ok, pickM ? ccM.value : ccN.value,
               pickM ? ccN.value : ccM.value);
    if (cert.stages.has_value()) {
      bool cc_match = close(cert.stages->cc_chosen, (pickM ? ccM : ccN).value) &&
                      close(cert.stages->cc_other, (pickM ? ccN : ccM).value);
      push_check(rep, "carleson-values", cc_match, (pickM ? ccM : ccN).value,
                 cert.stages->cc_chosen);
    }
  }

  rep.all_pass = true;
  for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
  return rep;
}

}  // namespace hf
