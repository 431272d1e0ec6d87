#pragma once

#include <cstdint>
#include <vector>

#include "haarfactor/comb.hpp"
#include "haarfactor/jones.hpp"

namespace hf {

// Parameters driving the block construction. Paper mode reproduces the
// closed-form level windows m_1 < m_2 < ... (astronomically deep beyond the
// first couple of steps); adaptive mode spends levels only as needed and is
// the mode that runs at realistic depths.
struct Schedule {
  enum class Mode { Paper, Adaptive };
  Mode mode = Mode::Adaptive;

  double eta = 0.25;    // almost-diagonalization target
  double gamma = 0.0;   // norm bound for the operator; <= 0 derives one

  // Adaptive: explicit per-step parameters (broadcast: shorter vectors reuse
  // their last entry). Empty means the automatic formulas
  //   rho_i = eta 2^{-i},  tau_i = 2 eta 8^{-i} 2^{-r_i} / gamma.
  std::vector<double> rho;
  std::vector<double> tau;
  int level_cap = -1;   // -1: the operator's depth

  // Paper: windows m_1 = 0, m_{i+1} = m_i + 1 + floor(4/(rho_{i+1}^2 tau_{i+1}^2)).
  std::vector<bigint> m;
  std::vector<bigrational> rho_exact;
  std::vector<bigrational> tau_exact;     // empty entry when not representable
  std::vector<bool> tau_representable;
  bigint depth_required = 0;

  static Schedule adaptive(double eta, double gamma = 0.0);
  static Schedule adaptive_explicit(std::vector<double> rho, std::vector<double> tau,
                                    double gamma = 0.0);

  bool auto_rho() const { return rho.empty(); }
  bool auto_tau() const { return tau.empty(); }
  double rho_at(std::int64_t step) const;
  double tau_at(std::int64_t step, int r_min, double gamma_hat) const;
};

// The closed-form schedule for a depth-n block family at norm bound gamma
// and target eta. Level windows grow so fast that step 4 is already out of
// reach of any machine; the bit budget turns that into a structured failure.
Schedule paper_schedule(int n, double gamma, double eta, std::size_t max_bits = 1u << 20);

// One step of the construction log.
struct QuasiDiagStep {
  std::int64_t order = 0;        // outer interval, breadth-first index
  DyadicInterval interval;
  int r_min = 0;                 // lowest admissible level this step
  double rho_used = 0.0;
  double tau_used = 0.0;
  std::vector<int> chosen_levels;  // per parent member processed
  double min_coverage = 1.0;       // worst relative coverage among members
  std::int64_t members = 0;
  double hyp_f_sum = 0.0;        // sum of sup-square norms of the scaled images
  double hyp_g_sum = 0.0;        // same for the adjoint images, integral norm
  double sign_quadratic = 0.0;   // interaction sum X(eps) for the chosen signs
  double offdiag_sum = 0.0;
  double offdiag_bound = 0.0;
  double diag_value = 0.0;
  double l2_sq = 0.0;
  double measure_floor = 0.0;    // |point set| / |interval|
};

struct QuasiDiagResult {
  BlockBasisFamily family;
  std::vector<std::int8_t> normalization_signs;  // column flips applied first
  std::vector<QuasiDiagStep> log;                // one entry per outer order
  double delta = 0.0;
  double eta_target = 0.0;
  double gamma_hat = 0.0;
  double achieved_eta = 0.0;     // max_i 4^i offdiag_sum_i / l2_sq_i

  std::vector<double> offdiag_sums() const;
  std::vector<double> diag_values() const;
  std::vector<double> measure_floors() const;
  std::vector<double> block_l2_sqs() const;
};

// Build a block family making T almost diagonal: diagonal entries at least
// delta |B_I| (after composing with the recorded column flips when
// delta > 0), off-diagonal interaction row sums at most eta 4^{-i} |B_I|.
QuasiDiagResult quasi_diagonalize(const HaarOperator& T, int n, const Schedule& sched,
                                  double delta);

// Signs eps on the members of one collection maximizing (exhaustively up to
// 20 members, by conditional expectations beyond) the interaction sum
//   X(eps) = sum_{K != K'} eps_K eps_{K'} pairing(r_K, h_{K'}),
// which is then nonnegative. T must already have nonnegative diagonal.
std::vector<std::int8_t> choose_signs(const IntervalCollection& coll,
                                      const HaarOperator& T);
double sign_quadratic(const IntervalCollection& coll,
                      const std::vector<std::int8_t>& eps, const HaarOperator& T);

// Block family whose span annihilates a given subspace: the level weight is
// the static one collected from a finite net of the subspace's unit sphere.
struct AnnihilatingResult {
  BlockBasisFamily family;
  HaarOperator projection;        // onto the span of the block vectors
  std::vector<HaarVector> net;
  std::vector<double> net_residuals;  // norm of projection(net member)
  double kappa_measured = 0.0;
  double tau_used = 0.0;
  std::vector<QuasiDiagStep> log;
};

AnnihilatingResult annihilating_basis(int depth, int n,
                                      const std::vector<HaarVector>& span_basis,
                                      double eta, const Schedule& sched);

}  // namespace hf
