#pragma once

#include <optional>
#include <string>
#include <vector>

#include "haarfactor/quasidiag.hpp"

namespace hf {

struct ResidualReport {
  double sup_norm = 0.0;   // largest entry of S H R - Id
  double op_upper = 0.0;   // certified operator norm bound of the same matrix
};

// Assembled norm bound ||R|| ||S|| <= kappa / (diag_floor (1 - q)).
struct BoundChain {
  double eta1 = 0.0;
  double kappa = 1.0;
  double diag_floor = 0.0;        // certified lower bound for diag / block measure
  double q_neumann = 0.0;         // certified norm of block matrix minus identity
  double bound_R = 1.0;
  double bound_S = 0.0;
  double product = 0.0;
  bool finite = false;
  double paper_contraction = 0.0;  // closed-form value the measured q is compared to
};

// Intermediate data of the sign-split pipeline, kept for reporting and
// re-verification.
struct StageReport {
  int n1 = 0;
  double cc_chosen = 0.0;
  double cc_other = 0.0;
  double cc_threshold = 0.0;      // (1 - eta1) n1 / 2, recorded only
  bool threshold_met = false;
  std::size_t root_index = 0;
  std::vector<double> root_densities;
  double rho_paper = 0.0;
  double rho_used = 0.0;
  double beta_paper = 0.0;
  double beta_used = 0.0;
  std::vector<double> betas_tried;
};

// Everything needed to recheck a factorization from scratch: the family the
// matrices are built from, the matrices themselves, and the measured
// quantities every inequality is assembled from.
struct FactorizationCertificate {
  std::string kind;               // "large-diagonal" or "primary"
  std::string backend;
  int n = 0;
  int N = 0;
  double eta = 0.0;
  double delta = 0.0;
  double eta1 = 0.0;
  std::string H_choice;           // "T" or "Id-T"
  BlockBasisFamily family;
  std::vector<std::int8_t> normalization_signs;
  HaarOperator R;                 // depth n into depth N
  HaarOperator S;                 // depth N onto depth n
  ResidualReport residual;
  double kappa_measured = 1.0;
  BoundChain analytic;
  std::vector<double> diag_values;
  std::vector<double> offdiag_sums;
  std::vector<double> offdiag_bounds;
  std::vector<double> l2_sqs;
  std::vector<double> measure_floors;
  double achieved_eta = 0.0;
  double solve_rcond = 0.0;
  std::optional<BlockBasisFamily> inner_family;  // sign-split pipeline only
  std::optional<StageReport> stages;
};

// Factor the identity through an operator whose Haar diagonal is uniformly
// at least delta: Id = S T R with ||R|| ||S|| bounded by the assembled
// chain. eta tunes how small the almost-diagonalization error is asked
// to be.
FactorizationCertificate factor_large_diagonal(const HaarOperator& T, int n, double delta,
                                               double eta, const Schedule& sched);

// Factor the identity through T or Id - T, whichever carries the larger
// half of the diagonal in the Carleson sense.
FactorizationCertificate factor_primary(const HaarOperator& T, int n, double eta,
                                        const Schedule& sched);

struct CertCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double reference = 0.0;
};

struct VerifyReport {
  bool all_pass = false;
  std::vector<CertCheck> checks;
};

// Recompute every claim in the certificate against the given operator: the
// family conditions, the matrix equations defining S and R, the residual,
// and each inequality of the bound chain.
VerifyReport verify_certificate(const FactorizationCertificate& cert, const HaarOperator& T);

}  // namespace hf
