#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <haarfactor/directsum.hpp>
#include <haarfactor/errors.hpp>
#include <haarfactor/factor.hpp>
#include <haarfactor/serialize.hpp>

namespace {

using namespace hf;

struct Common {
  std::string out = "-";
  std::string format = "json";
  std::string arith;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Output path, - for stdout");
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--arith", c.arith, "Arithmetic backend override")
      ->check(CLI::IsMember({"exact", "float"}));
}

void apply_arith(const Common& c) {
  if (c.arith == "exact") set_arith_mode(ArithMode::Exact);
  else if (c.arith == "float") set_arith_mode(ArithMode::Float);
}

void emit(const Common& c, const ojson& j) {
  if (c.format == "csv") {
    const std::string text = to_csv(j);
    if (c.out == "-" || c.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(c.out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open for writing: " + c.out);
      f << text;
    }
    return;
  }
  write_json(c.out, j);
}

// Operator input: either a file or a named generator with a seed.
struct OpSource {
  std::string file;
  std::string kind;
  int depth = 6;
  std::uint64_t seed = 1;
  double gen_delta = 0.5;
  double gen_noise = 0.0;
  int gen_rank = 0;
};

void add_op_source(CLI::App* cmd, OpSource& s) {
  auto* file = cmd->add_option("--operator", s.file, "Operator file (.json or .bin)");
  auto* gen = cmd->add_option("--gen", s.kind, "Operator generator")
                  ->check(CLI::IsMember({"diag_dominant", "multiplier", "projection"}));
  file->excludes(gen);
  cmd->add_option("--depth", s.depth, "Tree depth for generated operators");
  cmd->add_option("--seed", s.seed, "Generator seed");
  cmd->add_option("--gen-delta", s.gen_delta, "Diagonal magnitude floor for diag_dominant");
  cmd->add_option("--gen-noise", s.gen_noise, "Off-diagonal noise for diag_dominant");
  cmd->add_option("--gen-rank", s.gen_rank, "Rank for projection (0 = dim/3 + 1)");
}

RandomOpSpec op_spec(const OpSource& s) {
  RandomOpSpec spec;
  if (s.kind == "multiplier") spec.kind = OperatorKind::Multiplier;
  else if (s.kind == "projection") spec.kind = OperatorKind::ProjectionLike;
  else spec.kind = OperatorKind::DiagDominant;
  spec.delta = s.gen_delta;
  spec.noise = s.gen_noise;
  spec.rank = s.gen_rank;
  return spec;
}

HaarOperator resolve_operator(const OpSource& s) {
  if (!s.file.empty()) return load_operator(s.file);
  if (s.kind.empty())
    throw CLI::ValidationError("operator", "either --operator or --gen is required");
  return random_operator(s.depth, op_spec(s), s.seed);
}

ojson op_source_json(const OpSource& s) {
  if (!s.file.empty()) return ojson{{"file", s.file}};
  return ojson{{"gen", s.kind},
               {"depth", s.depth},
               {"seed", s.seed},
               {"gen_delta", s.gen_delta},
               {"gen_noise", s.gen_noise},
               {"gen_rank", s.gen_rank}};
}

struct SchedOpts {
  std::string mode = "adaptive";
  double eta = 0.25;
  double gamma = 0.0;
  std::vector<double> rho;
  std::vector<double> tau;
  int level_cap = -1;
};

void add_schedule(CLI::App* cmd, SchedOpts& s) {
  cmd->add_option("--schedule", s.mode, "Parameter schedule")
      ->check(CLI::IsMember({"paper", "adaptive"}));
  cmd->add_option("--eta", s.eta, "Almost-diagonalization target");
  cmd->add_option("--gamma", s.gamma, "Operator norm bound, <= 0 derives one");
  cmd->add_option("--rho", s.rho, "Per-step coverage deficits (adaptive)");
  cmd->add_option("--tau", s.tau, "Per-step weight thresholds (adaptive)");
  cmd->add_option("--level-cap", s.level_cap, "Deepest level the selection may use");
}

Schedule make_schedule(const SchedOpts& s, int n, double gamma_hint) {
  if (s.mode == "paper") {
    double g = s.gamma > 0 ? s.gamma : gamma_hint;
    return paper_schedule(n, g, s.eta);
  }
  Schedule sched = s.rho.empty() && s.tau.empty()
                       ? Schedule::adaptive(s.eta, s.gamma)
                       : Schedule::adaptive_explicit(s.rho, s.tau, s.gamma);
  sched.eta = s.eta;
  sched.level_cap = s.level_cap;
  return sched;
}

ojson sched_json(const SchedOpts& s) {
  return ojson{{"mode", s.mode},     {"eta", s.eta},
               {"gamma", s.gamma},   {"rho", s.rho},
               {"tau", s.tau},       {"level_cap", s.level_cap}};
}

ojson run_config(const std::string& subcommand, ojson params) {
  ojson c{{"subcommand", subcommand}, {"arith", std::string(arith_mode_name())}};
  c["params"] = std::move(params);
  return c;
}

int cmd_norms(const Common& common, const std::string& vec_path, const std::string& with_path) {
  HaarVector f = vector_from_json(read_json(vec_path));
  ojson rep{{"config", run_config("norms", ojson{{"vector", vec_path}, {"with", with_path}})},
            {"depth", f.depth},
            {"sl_inf", sl_inf_norm(f)},
            {"h1", h1_norm(f)},
            {"l2_sq", l2_norm_sq(f)}};
  if (!with_path.empty()) {
    HaarVector g = vector_from_json(read_json(with_path));
    rep["pairing"] = pairing(f, g);
    rep["bracket_ok"] = std::abs(pairing(f, g)) <= sl_inf_norm(f) * h1_norm(g) + 1e-12;
  }
  emit(common, rep);
  return 0;
}

int cmd_randop(const Common& common, const OpSource& src, const std::string& save) {
  if (src.kind.empty())
    throw CLI::ValidationError("randop", "--gen is required");
  HaarOperator T = random_operator(src.depth, op_spec(src), src.seed);
  if (!save.empty()) save_operator(save, T);
  double diag_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < T.A.rows(); ++i) diag_min = std::min(diag_min, std::abs(T.A(i, i)));
  emit(common, ojson{{"config", run_config("randop", op_source_json(src))},
                     {"depth", T.depth()},
                     {"saved", save},
                     {"diag_abs_min", diag_min},
                     {"opnorm_upper", opnorm_upper(T)}});
  return 0;
}

int cmd_certify_jones(const Common& common, const std::string& family_path) {
  BlockBasisFamily fam = blockfamily_from_json(read_json(family_path));
  JonesReport rep = verify_jones(fam);
  ojson out{{"config", run_config("certify-jones", ojson{{"family", family_path}})},
            {"n", fam.outer_depth},
            {"N", fam.inner_depth},
            {"report", jones_report_json(rep)}};
  emit(common, out);
  return rep.ok() ? 0 : 2;
}

int cmd_quasidiag(const Common& common, const OpSource& src, const SchedOpts& so, int n,
                  double delta, const std::string& save_family) {
  HaarOperator T = resolve_operator(src);
  Schedule sched = make_schedule(so, n, opnorm_upper(T));
  QuasiDiagResult res = quasi_diagonalize(T, n, sched, delta);
  JonesReport jrep = verify_jones(res.family);
  if (!save_family.empty()) write_json(save_family, blockfamily_json(res.family));
  ojson out{{"config", run_config("quasidiag", ojson{{"operator", op_source_json(src)},
                                                     {"schedule", sched_json(so)},
                                                     {"n", n},
                                                     {"delta", delta}})},
            {"result", quasidiag_json(res)},
            {"jones", jones_report_json(jrep)},
            {"saved_family", save_family}};
  emit(common, out);
  return 0;
}

int cmd_comb1(const Common& common, const std::string& weight_path, int depth, double tau,
              double rho, int r, int level_cap, int k0n, std::int64_t k0k) {
  FrequencyWeight w;
  if (!weight_path.empty()) {
    ojson j = read_json(weight_path);
    w = FrequencyWeight::from_values(j.at("depth").get<int>(),
                                     j.at("omega").get<std::vector<double>>());
  } else {
    w = FrequencyWeight(depth);
  }
  DyadicInterval K0{k0n, k0k};
  if (!K0.valid()) throw CLI::ValidationError("comb1", "invalid root interval");
  if (level_cap < 0) level_cap = w.depth;
  LevelCover cover = select_level_cover(K0, w, tau, rho, r, level_cap);
  ojson good = ojson::array();
  for (const auto& K : cover.good.items) good.push_back(interval_json(K));
  emit(common,
       ojson{{"config", run_config("lemma-comb1", ojson{{"weight", weight_path},
                                                        {"depth", w.depth},
                                                        {"tau", tau},
                                                        {"rho", rho},
                                                        {"r", r},
                                                        {"level_cap", level_cap},
                                                        {"K0", interval_json(K0)}})},
             {"k", cover.k},
             {"coverage", cover.coverage},
             {"good", good},
             {"window_size", cover_window_size(rho, tau)},
             {"coverage_ok", cover.coverage >= 1.0 - rho}});
  return 0;
}

int cmd_comb2(const Common& common, const std::string& family_path, int k, double rho,
              bool guarantee) {
  NestedFamily X = family_from_json(read_json(family_path));
  CarlesonValue cc = carleson_constant_exact(X);
  ojson out{{"config", run_config("lemma-comb2", ojson{{"family", family_path},
                                                       {"k", k},
                                                       {"rho", rho},
                                                       {"guarantee", guarantee}})},
            {"carleson", ojson{{"num", cc.num}, {"den", cc.den}, {"value", cc.value}}}};
  if (guarantee) {
    DenseRootResult res = find_dense_root(X, k, rho);
    out["index"] = res.index;
    out["densities"] = res.densities;
    out["members_under"] = res.under.size();
    bool all_dense = true;
    for (double d : res.densities) all_dense = all_dense && d > 1.0 - rho;
    out["dense_ok"] = all_dense;
  } else {
    DenseRootPick pick = best_dense_root(X, k);
    out["index"] = pick.index;
    out["densities"] = pick.densities;
    out["min_density"] = ojson{{"num", pick.num}, {"den", pick.den}};
  }
  emit(common, out);
  return 0;
}

int cmd_comb3(const Common& common, const std::string& family_path, int n, double alpha,
              double beta, bool enforce) {
  NestedFamily X = family_from_json(read_json(family_path));
  PruneResult res = prune_to_dense(X, n, alpha, beta, enforce);
  ojson fsets = ojson::array();
  for (const auto& F : res.F) fsets.push_back(leafset_json(F));
  emit(common,
       ojson{{"config", run_config("lemma-comb3", ojson{{"family", family_path},
                                                        {"n", n},
                                                        {"alpha", alpha},
                                                        {"beta", beta},
                                                        {"enforce", enforce}})},
             {"picked", res.picked},
             {"kept", res.Y.size()},
             {"levels", fsets},
             {"conclusion_a", res.conclusion_a},
             {"conclusion_b", res.conclusion_b},
             {"gn_is_intersection", res.gn_is_intersection}});
  return 0;
}

int emit_certificate(const Common& common, const FactorizationCertificate& cert,
                     const ojson& config, const HaarOperator& T) {
  VerifyReport self = verify_certificate(cert, T);
  ojson out{{"config", config},
            {"certificate", certificate_json(cert)},
            {"self_check", verify_report_json(self)}};
  emit(common, out);
  return self.all_pass ? 0 : 2;
}

int run_verify(const Common& common, const std::string& cert_path, const HaarOperator& T,
               const ojson& config) {
  ojson j = read_json(cert_path);
  if (j.contains("certificate")) j = j.at("certificate");
  FactorizationCertificate cert = certificate_from_json(j);
  VerifyReport rep = verify_certificate(cert, T);
  ojson out{{"config", config}, {"verify", verify_report_json(rep)}};
  emit(common, out);
  return rep.all_pass ? 0 : 2;
}

int cmd_factor_local(const Common& common, const OpSource& src, const SchedOpts& so, int n,
                     double delta, const std::string& verify_path) {
  HaarOperator T = resolve_operator(src);
  ojson config = run_config("factor-local", ojson{{"operator", op_source_json(src)},
                                                  {"schedule", sched_json(so)},
                                                  {"n", n},
                                                  {"delta", delta},
                                                  {"verify", verify_path}});
  if (!verify_path.empty()) return run_verify(common, verify_path, T, config);
  Schedule sched = make_schedule(so, n, opnorm_upper(T));
  FactorizationCertificate cert = factor_large_diagonal(T, n, delta, so.eta, sched);
  return emit_certificate(common, cert, config, T);
}

int cmd_factor_primary(const Common& common, const OpSource& src, const SchedOpts& so, int n,
                       const std::string& verify_path) {
  HaarOperator T = resolve_operator(src);
  ojson config = run_config("factor-primary", ojson{{"operator", op_source_json(src)},
                                                    {"schedule", sched_json(so)},
                                                    {"n", n},
                                                    {"verify", verify_path}});
  if (!verify_path.empty()) return run_verify(common, verify_path, T, config);
  Schedule sched = make_schedule(so, n, opnorm_upper(T));
  FactorizationCertificate cert = factor_primary(T, n, so.eta, sched);
  return emit_certificate(common, cert, config, T);
}

DirectSumVector random_dsum(int M, std::uint64_t seed) {
  DirectSumVector x = DirectSumVector::zero(M, std::numeric_limits<double>::infinity());
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& b : x.blocks)
    for (auto& c : b.coeffs) c = 2.0 * uniform01(rng()) - 1.0;
  return x;
}

int cmd_directsum(const Common& common, const std::string& file, int M, std::uint64_t seed) {
  DirectSumVector x = file.empty() ? random_dsum(M, seed) : dsum_from_json(read_json(file));
  const double inf = std::numeric_limits<double>::infinity();

  HaarVector e = embed_sum(x);
  const bool isometric = sl_inf_norm(e) == dsum_norm(x, inf);

  HaarVector p = gap_projection(e);
  const bool idempotent = gap_projection(p).coeffs == p.coeffs;
  const bool nonincreasing = sl_inf_norm(p) <= sl_inf_norm(e) && h1_norm(p) <= h1_norm(e);

  DirectSumVector split = split_blocks(e);
  const bool retract = last_block(split).coeffs == e.coeffs;

  bool monotone = true;
  const double rs[] = {1.0, 1.5, 2.0, 4.0, 8.0, inf};
  double prev = std::numeric_limits<double>::infinity();
  for (double r : rs) {
    const double v = dsum_norm(x, r);
    monotone = monotone && v <= prev + 1e-12 * std::max(1.0, prev);
    prev = v;
  }

  emit(common,
       ojson{{"config", run_config("directsum-check",
                                   ojson{{"file", file}, {"M", x.M}, {"seed", seed}})},
             {"M", x.M},
             {"norm_inf", dsum_norm(x, inf)},
             {"norm_2", dsum_norm(x, 2.0)},
             {"embed_isometric", isometric},
             {"projection_idempotent", idempotent},
             {"projection_nonincreasing", nonincreasing},
             {"retract_inverse", retract},
             {"norm_monotone_in_r", monotone}});
  return (isometric && idempotent && nonincreasing && retract && monotone) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic Haar-system factorization toolkit"};
  app.require_subcommand(1);

  Common common;
  OpSource src;
  SchedOpts so;
  std::string vec_path, with_path, save, family_path, weight_path, verify_path, dsum_file;
  int n = 1, depth = 6, r = 0, level_cap = -1, k = 1, k0n = 0, M = 4;
  std::int64_t k0k = 1;
  double delta = 0.0, tau = 0.125, rho = 0.25, alpha = 0.01, beta = 0.25;
  std::uint64_t seed = 1;
  bool guarantee = false, no_enforce = false;

  auto* c_norms = app.add_subcommand("norms", "Norm table for a coefficient vector");
  c_norms->add_option("--vector", vec_path, "Vector file")->required();
  c_norms->add_option("--with", with_path, "Second vector; adds the pairing");
  add_common(c_norms, common);

  auto* c_randop = app.add_subcommand("randop", "Generate a reproducible random operator");
  add_op_source(c_randop, src);
  c_randop->add_option("--save", save, "Operator output file (.json or .bin)");
  add_common(c_randop, common);

  auto* c_jones = app.add_subcommand("certify-jones", "Check block family compatibility");
  c_jones->add_option("--family", family_path, "Block family file")->required();
  add_common(c_jones, common);

  auto* c_qd = app.add_subcommand("quasidiag", "Almost-diagonalize an operator");
  add_op_source(c_qd, src);
  add_schedule(c_qd, so);
  c_qd->add_option("--n", n, "Output block depth");
  c_qd->add_option("--delta", delta, "Diagonal floor; 0 skips normalization");
  c_qd->add_option("--save-family", save, "Write the block family here");
  add_common(c_qd, common);

  auto* c1 = app.add_subcommand("lemma-comb1", "Light-level selection under a weight");
  c1->add_option("--weight", weight_path, "Weight file {depth, omega}");
  c1->add_option("--depth", depth, "Depth when no weight file is given");
  c1->add_option("--tau", tau, "Lightness threshold");
  c1->add_option("--rho", rho, "Coverage deficit");
  c1->add_option("--r", r, "Lowest admissible level");
  c1->add_option("--level-cap", level_cap, "Deepest level to scan");
  c1->add_option("--k0-n", k0n, "Root interval level");
  c1->add_option("--k0-k", k0k, "Root interval position");
  add_common(c1, common);

  auto* c2 = app.add_subcommand("lemma-comb2", "Dense root of a nested family");
  c2->add_option("--family", family_path, "Nested family file")->required();
  c2->add_option("--k", k, "Number of generations to cover");
  c2->add_option("--rho", rho, "Density deficit (with --guarantee)");
  c2->add_flag("--guarantee", guarantee, "Require the Carleson hypothesis and certify");
  add_common(c2, common);

  auto* c3 = app.add_subcommand("lemma-comb3", "Prune a nested family to dense generations");
  c3->add_option("--family", family_path, "Nested family file")->required();
  c3->add_option("--n", n, "Generation depth");
  c3->add_option("--alpha", alpha, "Top-generation deficit");
  c3->add_option("--beta", beta, "Per-member fill deficit");
  c3->add_flag("--no-enforce", no_enforce, "Report conclusions instead of requiring them");
  add_common(c3, common);

  auto* cfl = app.add_subcommand("factor-local", "Factor the identity through T");
  add_op_source(cfl, src);
  add_schedule(cfl, so);
  cfl->add_option("--n", n, "Target depth of the factored identity");
  cfl->add_option("--delta", delta, "Diagonal floor of T")->required();
  cfl->add_option("--verify", verify_path, "Verify this certificate instead of factoring");
  add_common(cfl, common);

  auto* cfp = app.add_subcommand("factor-primary", "Factor the identity through T or Id-T");
  add_op_source(cfp, src);
  add_schedule(cfp, so);
  cfp->add_option("--n", n, "Target depth of the factored identity");
  cfp->add_option("--verify", verify_path, "Verify this certificate instead of factoring");
  add_common(cfp, common);

  auto* cds = app.add_subcommand("directsum-check", "Exercise the direct-sum operators");
  cds->add_option("--file", dsum_file, "Direct sum file");
  cds->add_option("--M", M, "Block count for generated input");
  cds->add_option("--seed", seed, "Generator seed");
  add_common(cds, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    apply_arith(common);
    if (*c_norms) return cmd_norms(common, vec_path, with_path);
    if (*c_randop) return cmd_randop(common, src, save);
    if (*c_jones) return cmd_certify_jones(common, family_path);
    if (*c_qd) return cmd_quasidiag(common, src, so, n, delta, save);
    if (*c1) return cmd_comb1(common, weight_path, depth, tau, rho, r, level_cap, k0n, k0k);
    if (*c2) return cmd_comb2(common, family_path, k, rho, guarantee);
    if (*c3) return cmd_comb3(common, family_path, n, alpha, beta, !no_enforce);
    if (*cfl) return cmd_factor_local(common, src, so, n, delta, verify_path);
    if (*cfp) return cmd_factor_primary(common, src, so, n, verify_path);
    if (*cds) return cmd_directsum(common, dsum_file, M, seed);
  } catch (const StructuredFailure& e) {
    ojson data = ojson::object();
    for (const auto& [key, value] : e.data()) data[key] = value;
    emit(common, ojson{{"error", ojson{{"stage", e.stage()},
                                       {"message", e.what()},
                                       {"data", std::move(data)}}}});
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
