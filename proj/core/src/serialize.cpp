#include "haarfactor/serialize.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hf {

namespace {

ojson jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double jdouble(const ojson& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw std::invalid_argument("serialize: expected number, got \"" + s + "\"");
  }
  return j.get<double>();
}

ojson signs_json(const std::vector<std::int8_t>& signs) {
  ojson flips = ojson::array();
  for (std::size_t i = 0; i < signs.size(); ++i)
    if (signs[i] < 0) flips.push_back(i + 1);
  return flips;
}

std::vector<std::int8_t> signs_from_json(const ojson& j, std::int64_t size) {
  std::vector<std::int8_t> signs(static_cast<std::size_t>(size), 1);
  for (const auto& o : j) {
    const std::int64_t ord = o.get<std::int64_t>();
    if (ord < 1 || ord > size) throw std::invalid_argument("serialize: sign order out of range");
    signs[static_cast<std::size_t>(ord - 1)] = -1;
  }
  return signs;
}

}  // namespace

ojson interval_json(const DyadicInterval& I) {
  return ojson{{"n", I.level}, {"k", I.position}};
}

DyadicInterval interval_from_json(const ojson& j) {
  DyadicInterval I{j.at("n").get<int>(), j.at("k").get<std::int64_t>()};
  if (!I.valid()) throw std::invalid_argument("serialize: invalid interval");
  return I;
}

ojson leafset_json(const LeafSet& s) {
  ojson leaves = ojson::array();
  for (std::int64_t l : s.leaves()) leaves.push_back(l + 1);
  return ojson{{"resolution", s.resolution()}, {"leaves", std::move(leaves)}};
}

LeafSet leafset_from_json(const ojson& j) {
  LeafSet s(j.at("resolution").get<int>());
  for (const auto& o : j.at("leaves")) {
    const std::int64_t leaf = o.get<std::int64_t>() - 1;
    if (leaf < 0 || leaf >= pow2ll(s.resolution()))
      throw std::invalid_argument("serialize: leaf out of range");
    s.set(leaf);
  }
  return s;
}

ojson family_json(const NestedFamily& fam) {
  ojson sets = ojson::array();
  for (const auto& s : fam.sets) {
    ojson leaves = ojson::array();
    for (std::int64_t l : s.leaves()) leaves.push_back(l + 1);
    sets.push_back(std::move(leaves));
  }
  return ojson{{"resolution", fam.resolution}, {"sets", std::move(sets)}};
}

NestedFamily family_from_json(const ojson& j) {
  NestedFamily fam;
  fam.resolution = j.at("resolution").get<int>();
  for (const auto& arr : j.at("sets")) {
    LeafSet s(fam.resolution);
    for (const auto& o : arr) {
      const std::int64_t leaf = o.get<std::int64_t>() - 1;
      if (leaf < 0 || leaf >= pow2ll(fam.resolution))
        throw std::invalid_argument("serialize: leaf out of range");
      s.set(leaf);
    }
    fam.sets.push_back(std::move(s));
  }
  return fam;
}

ojson vector_json(const HaarVector& f) {
  return ojson{{"depth", f.depth}, {"coeffs", f.coeffs}};
}

HaarVector vector_from_json(const ojson& j) {
  HaarVector f(j.at("depth").get<int>());
  const auto& coeffs = j.at("coeffs");
  if (static_cast<std::int64_t>(coeffs.size()) != f.size())
    throw std::invalid_argument("serialize: coefficient count does not match depth");
  for (std::int64_t i = 0; i < f.size(); ++i) f.coeffs[static_cast<std::size_t>(i)] = jdouble(coeffs[static_cast<std::size_t>(i)]);
  return f;
}

ojson operator_json(const HaarOperator& T) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < T.A.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index k = 0; k < T.A.cols(); ++k) row.push_back(T.A(i, k));
    rows.push_back(std::move(row));
  }
  if (T.square()) return ojson{{"depth", T.out_depth}, {"rows", std::move(rows)}};
  return ojson{{"out_depth", T.out_depth}, {"in_depth", T.in_depth}, {"rows", std::move(rows)}};
}

HaarOperator operator_from_json(const ojson& j) {
  int out_d, in_d;
  if (j.contains("depth")) {
    out_d = in_d = j.at("depth").get<int>();
  } else {
    out_d = j.at("out_depth").get<int>();
    in_d = j.at("in_depth").get<int>();
  }
  HaarOperator T(out_d, in_d);
  const auto& rows = j.at("rows");
  if (static_cast<std::int64_t>(rows.size()) != tree_size(out_d))
    throw std::invalid_argument("serialize: row count does not match depth");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (static_cast<std::int64_t>(row.size()) != tree_size(in_d))
      throw std::invalid_argument("serialize: column count does not match depth");
    for (std::size_t k = 0; k < row.size(); ++k)
      T.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = jdouble(row[k]);
  }
  return T;
}

ojson blockfamily_json(const BlockBasisFamily& fam) {
  ojson collections = ojson::object();
  for (std::int64_t ord = 1; ord <= tree_size(fam.outer_depth); ++ord) {
    ojson members = ojson::array();
    for (const auto& K : fam.collection(ord).items) members.push_back(interval_json(K));
    collections[std::to_string(ord)] = std::move(members);
  }
  return ojson{{"n", fam.outer_depth},
               {"N", fam.inner_depth},
               {"collections", std::move(collections)},
               {"signs", signs_json(fam.signs)}};
}

BlockBasisFamily blockfamily_from_json(const ojson& j) {
  BlockBasisFamily fam(j.at("n").get<int>(), j.at("N").get<int>());
  for (const auto& [key, members] : j.at("collections").items()) {
    const std::int64_t ord = std::stoll(key);
    if (ord < 1 || ord > tree_size(fam.outer_depth))
      throw std::invalid_argument("serialize: collection order out of range");
    for (const auto& m : members) {
      const DyadicInterval K = interval_from_json(m);
      if (K.level > fam.inner_depth)
        throw std::invalid_argument("serialize: member below inner depth");
      fam.collection(ord).insert(K);
    }
  }
  fam.signs = signs_from_json(j.at("signs"), tree_size(fam.inner_depth));
  return fam;
}

ojson dsum_json(const DirectSumVector& x) {
  ojson blocks = ojson::array();
  for (const auto& b : x.blocks) blocks.push_back(vector_json(b));
  return ojson{{"M", x.M}, {"r", jnum(x.r)}, {"blocks", std::move(blocks)}};
}

DirectSumVector dsum_from_json(const ojson& j) {
  DirectSumVector x = DirectSumVector::zero(j.at("M").get<int>(), 2.0);
  x.r = jdouble(j.at("r"));
  if (!(x.r >= 1.0)) throw std::invalid_argument("serialize: r must be >= 1");
  const auto& blocks = j.at("blocks");
  if (blocks.size() != x.blocks.size())
    throw std::invalid_argument("serialize: block count does not match M");
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    HaarVector b = vector_from_json(blocks[k]);
    if (b.depth != static_cast<int>(k))
      throw std::invalid_argument("serialize: block depth mismatch");
    x.blocks[k] = std::move(b);
  }
  return x;
}

ojson jones_report_json(const JonesReport& rep) {
  ojson violations = ojson::array();
  for (const auto& v : rep.violations)
    violations.push_back(ojson{{"condition", v.condition}, {"detail", v.detail}});
  return ojson{{"ok", rep.ok()},
               {"j1_ok", rep.j1_ok},
               {"j2_ok", rep.j2_ok},
               {"j3_ok", rep.j3_ok},
               {"kappa_finite", rep.kappa_finite},
               {"kappa", jnum(rep.kappa_measured)},
               {"kappa_num", rep.kappa_num},
               {"kappa_den", rep.kappa_den},
               {"violations", std::move(violations)},
               {"kappa_witnesses", rep.kappa_witnesses}};
}

namespace {

ojson step_json(const QuasiDiagStep& st) {
  return ojson{{"order", st.order},
               {"interval", interval_json(st.interval)},
               {"r_min", st.r_min},
               {"rho_used", st.rho_used},
               {"tau_used", st.tau_used},
               {"chosen_levels", st.chosen_levels},
               {"min_coverage", st.min_coverage},
               {"members", st.members},
               {"hyp_f_sum", st.hyp_f_sum},
               {"hyp_g_sum", st.hyp_g_sum},
               {"sign_quadratic", st.sign_quadratic},
               {"offdiag_sum", st.offdiag_sum},
               {"offdiag_bound", st.offdiag_bound},
               {"diag_value", st.diag_value},
               {"l2_sq", st.l2_sq},
               {"measure_floor", st.measure_floor}};
}

}  // namespace

ojson quasidiag_json(const QuasiDiagResult& res) {
  ojson log = ojson::array();
  for (const auto& st : res.log) log.push_back(step_json(st));
  return ojson{{"family", blockfamily_json(res.family)},
               {"normalization_flips", signs_json(res.normalization_signs)},
               {"delta", res.delta},
               {"eta_target", res.eta_target},
               {"gamma_hat", res.gamma_hat},
               {"achieved_eta", res.achieved_eta},
               {"log", std::move(log)}};
}

ojson annihilating_json(const AnnihilatingResult& res) {
  ojson log = ojson::array();
  for (const auto& st : res.log) log.push_back(step_json(st));
  ojson net = ojson::array();
  for (const auto& g : res.net) net.push_back(vector_json(g));
  return ojson{{"family", blockfamily_json(res.family)},
               {"projection", operator_json(res.projection)},
               {"net", std::move(net)},
               {"net_residuals", res.net_residuals},
               {"kappa", jnum(res.kappa_measured)},
               {"tau_used", res.tau_used},
               {"log", std::move(log)}};
}

namespace {

ojson bound_chain_json(const BoundChain& b) {
  return ojson{{"eta1", b.eta1},
               {"kappa", jnum(b.kappa)},
               {"diag_floor", b.diag_floor},
               {"q_neumann", b.q_neumann},
               {"bound_R", b.bound_R},
               {"bound_S", jnum(b.bound_S)},
               {"product", jnum(b.product)},
               {"finite", b.finite},
               {"paper_contraction", jnum(b.paper_contraction)}};
}

BoundChain bound_chain_from_json(const ojson& j) {
  BoundChain b;
  b.eta1 = jdouble(j.at("eta1"));
  b.kappa = jdouble(j.at("kappa"));
  b.diag_floor = jdouble(j.at("diag_floor"));
  b.q_neumann = jdouble(j.at("q_neumann"));
  b.bound_R = jdouble(j.at("bound_R"));
  b.bound_S = jdouble(j.at("bound_S"));
  b.product = jdouble(j.at("product"));
  b.finite = j.at("finite").get<bool>();
  b.paper_contraction = jdouble(j.at("paper_contraction"));
  return b;
}

ojson stage_report_json(const StageReport& st) {
  return ojson{{"n1", st.n1},
               {"cc_chosen", st.cc_chosen},
               {"cc_other", st.cc_other},
               {"cc_threshold", st.cc_threshold},
               {"threshold_met", st.threshold_met},
               {"root_index", st.root_index},
               {"root_densities", st.root_densities},
               {"rho_paper", jnum(st.rho_paper)},
               {"rho_used", st.rho_used},
               {"beta_paper", jnum(st.beta_paper)},
               {"beta_used", st.beta_used},
               {"betas_tried", st.betas_tried}};
}

StageReport stage_report_from_json(const ojson& j) {
  StageReport st;
  st.n1 = j.at("n1").get<int>();
  st.cc_chosen = jdouble(j.at("cc_chosen"));
  st.cc_other = jdouble(j.at("cc_other"));
  st.cc_threshold = jdouble(j.at("cc_threshold"));
  st.threshold_met = j.at("threshold_met").get<bool>();
  st.root_index = j.at("root_index").get<std::size_t>();
  st.root_densities = j.at("root_densities").get<std::vector<double>>();
  st.rho_paper = jdouble(j.at("rho_paper"));
  st.rho_used = jdouble(j.at("rho_used"));
  st.beta_paper = jdouble(j.at("beta_paper"));
  st.beta_used = jdouble(j.at("beta_used"));
  st.betas_tried = j.at("betas_tried").get<std::vector<double>>();
  return st;
}

}  // namespace

ojson certificate_json(const FactorizationCertificate& cert) {
  ojson j{{"kind", cert.kind},
          {"backend", cert.backend},
          {"n", cert.n},
          {"N", cert.N},
          {"eta", cert.eta},
          {"delta", cert.delta},
          {"eta1", cert.eta1},
          {"H_choice", cert.H_choice},
          {"family", blockfamily_json(cert.family)},
          {"normalization_flips", signs_json(cert.normalization_signs)},
          {"R", operator_json(cert.R)},
          {"S", operator_json(cert.S)},
          {"residual", ojson{{"sup_norm", cert.residual.sup_norm}, {"op_upper", cert.residual.op_upper}}},
          {"kappa", jnum(cert.kappa_measured)},
          {"analytic", bound_chain_json(cert.analytic)},
          {"diag_values", cert.diag_values},
          {"offdiag_sums", cert.offdiag_sums},
          {"offdiag_bounds", cert.offdiag_bounds},
          {"l2_sqs", cert.l2_sqs},
          {"measure_floors", cert.measure_floors},
          {"achieved_eta", cert.achieved_eta},
          {"solve_rcond", cert.solve_rcond}};
  if (cert.inner_family) j["inner_family"] = blockfamily_json(*cert.inner_family);
  if (cert.stages) j["stages"] = stage_report_json(*cert.stages);
  return j;
}

FactorizationCertificate certificate_from_json(const ojson& j) {
  FactorizationCertificate cert;
  cert.kind = j.at("kind").get<std::string>();
  cert.backend = j.at("backend").get<std::string>();
  cert.n = j.at("n").get<int>();
  cert.N = j.at("N").get<int>();
  cert.eta = jdouble(j.at("eta"));
  cert.delta = jdouble(j.at("delta"));
  cert.eta1 = jdouble(j.at("eta1"));
  cert.H_choice = j.at("H_choice").get<std::string>();
  cert.family = blockfamily_from_json(j.at("family"));
  cert.normalization_signs = signs_from_json(j.at("normalization_flips"), tree_size(cert.N));
  cert.R = operator_from_json(j.at("R"));
  cert.S = operator_from_json(j.at("S"));
  cert.residual.sup_norm = jdouble(j.at("residual").at("sup_norm"));
  cert.residual.op_upper = jdouble(j.at("residual").at("op_upper"));
  cert.kappa_measured = jdouble(j.at("kappa"));
  cert.analytic = bound_chain_from_json(j.at("analytic"));
  cert.diag_values = j.at("diag_values").get<std::vector<double>>();
  cert.offdiag_sums = j.at("offdiag_sums").get<std::vector<double>>();
  cert.offdiag_bounds = j.at("offdiag_bounds").get<std::vector<double>>();
  cert.l2_sqs = j.at("l2_sqs").get<std::vector<double>>();
  cert.measure_floors = j.at("measure_floors").get<std::vector<double>>();
  cert.achieved_eta = jdouble(j.at("achieved_eta"));
  cert.solve_rcond = jdouble(j.at("solve_rcond"));
  if (j.contains("inner_family")) cert.inner_family = blockfamily_from_json(j.at("inner_family"));
  if (j.contains("stages")) cert.stages = stage_report_from_json(j.at("stages"));
  return cert;
}

ojson verify_report_json(const VerifyReport& rep) {
  ojson checks = ojson::array();
  for (const auto& c : rep.checks)
    checks.push_back(ojson{{"name", c.name},
                           {"pass", c.pass},
                           {"measured", jnum(c.measured)},
                           {"reference", jnum(c.reference)}});
  return ojson{{"all_pass", rep.all_pass}, {"checks", std::move(checks)}};
}

void write_json(const std::string& path, const ojson& j) {
  if (path == "-" || path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

ojson read_json(const std::string& path) {
  if (path == "-") return ojson::parse(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return ojson::parse(in);
}

namespace {

bool has_bin_extension(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
}

}  // namespace

void save_operator(const std::string& path, const HaarOperator& T) {
  if (!has_bin_extension(path)) {
    write_json(path, operator_json(T));
    return;
  }
  static_assert(std::endian::native == std::endian::little,
                "binary operator files assume a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const ojson header{{"out_depth", T.out_depth},
                     {"in_depth", T.in_depth},
                     {"format", "dense-f64-le"}};
  out << header.dump() << "\n";
  out.write(reinterpret_cast<const char*>(T.A.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(T.A.size())));
  if (!out) throw std::runtime_error("write failed: " + path);
}

HaarOperator load_operator(const std::string& path) {
  if (!has_bin_extension(path)) return operator_from_json(read_json(path));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw std::runtime_error("truncated operator file: " + path);
  const ojson header = ojson::parse(header_line);
  if (header.at("format").get<std::string>() != "dense-f64-le")
    throw std::runtime_error("unknown operator format in " + path);
  HaarOperator T(header.at("out_depth").get<int>(), header.at("in_depth").get<int>());
  in.read(reinterpret_cast<char*>(T.A.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(T.A.size())));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(T.A.size())))
    throw std::runtime_error("truncated operator file: " + path);
  return T;
}

namespace {

void flatten(const ojson& j, const std::string& prefix, std::ostringstream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
  } else if (j.is_array()) {
    std::size_t i = 0;
    for (const auto& value : j) {
      flatten(value, prefix + "." + std::to_string(i), out);
      ++i;
    }
  } else {
    out << prefix << "," << j.dump() << "\n";
  }
}

}  // namespace

std::string to_csv(const ojson& j) {
  std::ostringstream out;
  out << "key,value\n";
  flatten(j, "", out);
  return out.str();
}

}  // namespace hf
