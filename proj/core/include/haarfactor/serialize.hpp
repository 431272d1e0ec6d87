#pragma once

#include <string>

#include <json.hpp>

#include "haarfactor/directsum.hpp"
#include "haarfactor/dyadic.hpp"
#include "haarfactor/factor.hpp"
#include "haarfactor/haar.hpp"
#include "haarfactor/jones.hpp"
#include "haarfactor/operators.hpp"
#include "haarfactor/quasidiag.hpp"

namespace hf {

using ojson = nlohmann::ordered_json;

ojson interval_json(const DyadicInterval& I);
DyadicInterval interval_from_json(const ojson& j);

ojson leafset_json(const LeafSet& s);
LeafSet leafset_from_json(const ojson& j);

ojson family_json(const NestedFamily& fam);
NestedFamily family_from_json(const ojson& j);

ojson vector_json(const HaarVector& f);
HaarVector vector_from_json(const ojson& j);

ojson operator_json(const HaarOperator& T);
HaarOperator operator_from_json(const ojson& j);

ojson blockfamily_json(const BlockBasisFamily& fam);
BlockBasisFamily blockfamily_from_json(const ojson& j);

ojson dsum_json(const DirectSumVector& x);
DirectSumVector dsum_from_json(const ojson& j);

ojson jones_report_json(const JonesReport& rep);
ojson quasidiag_json(const QuasiDiagResult& res);
ojson annihilating_json(const AnnihilatingResult& res);

ojson certificate_json(const FactorizationCertificate& cert);
FactorizationCertificate certificate_from_json(const ojson& j);
ojson verify_report_json(const VerifyReport& rep);

// Path "-" means stdout / stdin. Binary operator files use the ".bin"
// extension: a one-line JSON header followed by row-major little-endian f64.
void write_json(const std::string& path, const ojson& j);
ojson read_json(const std::string& path);
void save_operator(const std::string& path, const HaarOperator& T);
HaarOperator load_operator(const std::string& path);

// Flatten to "key,value" lines; nested keys joined with '.'.
std::string to_csv(const ojson& j);

}  // namespace hf
