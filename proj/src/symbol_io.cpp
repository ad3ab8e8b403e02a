#include "nek/symbol_io.hpp"

#include "nek/errors.hpp"

namespace nek::sym {

using nlohmann::json;

json symbol_to_json(const SymbolFunction& f) {
  json j;
  j["d"] = f.dim();
  j["k_max"] = f.kmax();
  j["real"] = f.is_real();
  json modes = json::array();
  for (const auto& [k, c] : f.coeffs()) {
    json m;
    m["k"] = k;
    m["expr"] = to_prefix(c);
    modes.push_back(std::move(m));
  }
  j["modes"] = std::move(modes);
  return j;
}

SymbolFunction symbol_from_json(const json& j) {
  for (const char* key : {"d", "k_max", "real", "modes"})
    if (!j.contains(key))
      throw ConfigError(std::string("symbol json: missing key '") + key + "'");
  const int d = j.at("d").get<int>();
  const int kmax = j.at("k_max").get<int>();
  const bool real = j.at("real").get<bool>();
  SymbolFunction f(d, kmax, real);
  for (const auto& m : j.at("modes")) {
    if (!m.contains("k") || !m.contains("expr"))
      throw ConfigError("symbol json: mode needs 'k' and 'expr'");
    Mode k = m.at("k").get<Mode>();
    if (static_cast<int>(k.size()) != d)
      throw ConfigError("symbol json: mode dimension mismatch");
    f.set_coeff(k, parse_prefix(m.at("expr").get<std::string>(), d));
  }
  if (real) {
    for (const auto& [k, c] : f.coeffs()) {
      Mode neg(k.size());
      for (std::size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
      if (!f.coeff(neg))
        throw ConfigError(
            "symbol json: real-flagged symbol lacks the conjugate mode of a "
            "stored k");
    }
  }
  return f;
}

}  // namespace nek::sym

namespace nek::dyn {

using nlohmann::json;

json system_to_json(const HamiltonianSystem& sys) {
  json j;
  j["kind"] = "symbol";
  j["include_h0"] = sys.include_h0;
  j["P"] = sym::symbol_to_json(sys.perturbation);
  return j;
}

HamiltonianSystem system_from_json(const json& j, int kmax_budget) {
  if (!j.contains("kind"))
    throw ConfigError("system json: missing key 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "symbol") {
    if (!j.contains("P")) throw ConfigError("system json: missing key 'P'");
    HamiltonianSystem sys;
    sys.perturbation = sym::symbol_from_json(j.at("P"));
    sys.d = sys.perturbation.dim();
    sys.include_h0 = j.value("include_h0", true);
    return sys;
  }
  if (kind == "em") {
    if (!j.contains("A")) throw ConfigError("system json: missing key 'A'");
    EMField field;
    for (const auto& aj : j.at("A"))
      field.vector_potential.push_back(sym::symbol_from_json(aj));
    if (field.vector_potential.empty())
      throw ConfigError("system json: 'A' must not be empty");
    const int d = field.vector_potential.front().dim();
    if (j.contains("V"))
      field.scalar_potential = sym::symbol_from_json(j.at("V"));
    else
      field.scalar_potential = sym::SymbolFunction::zero(d);
    return em_system(field, kmax_budget);
  }
  throw ConfigError("system json: unknown kind '" + kind + "'");
}

}  // namespace nek::dyn

namespace nek::coho {

using nlohmann::json;

json ledger_to_json(const std::vector<LedgerEntry>& ledger) {
  json arr = json::array();
  for (const auto& e : ledger) {
    json j;
    j["step"] = e.step;
    j["m_class"] = e.m_class;
    j["sigma"] = e.sigma;
    j["e1"] = e.e1;
    j["e2"] = e.e2;
    j["e3"] = e.e3;
    j["e4"] = e.e4;
    j["sigma1"] = e.s1;
    j["sigma2"] = e.s2;
    j["sigma3"] = e.s3;
    j["sigma4"] = e.s4;
    j["fitted_in"] = e.fitted_in;
    j["fitted_out"] = e.fitted_out;
    j["truncated"] = e.truncated;
    j["generator_modes"] = e.generator_modes;
    j["tape_size_out"] = e.tape_size_out;
    arr.push_back(std::move(j));
  }
  return arr;
}

json normal_form_to_json(const NormalFormResult& nf) {
  json j;
  j["z"] = sym::symbol_to_json(nf.z);
  j["r"] = sym::symbol_to_json(nf.r);
  j["r_flat"] = sym::symbol_to_json(nf.r_flat);
  json gens = json::array();
  for (const auto& g : nf.generators) gens.push_back(sym::symbol_to_json(g));
  j["generators"] = std::move(gens);
  j["ledger"] = ledger_to_json(nf.ledger);
  j["budget_exhausted"] = nf.budget_exhausted;
  j["steps"] = nf.steps;
  return j;
}

}  // namespace nek::coho

namespace nek::geo {

using nlohmann::json;

json label_to_json(const ZoneLabel& label) {
  json j;
  j["s"] = label.s;
  json basis = json::array();
  for (const auto& row : label.module.basis()) basis.push_back(row);
  j["module"] = {{"d", label.module.dim()}, {"basis", std::move(basis)}};
  j["witnesses"] = label.witnesses;
  return j;
}

json classify_to_json(const ClassifyResult& res) {
  json j;
  switch (res.status) {
    case ClassifyStatus::Ok:
      j["status"] = "ok";
      j["label"] = label_to_json(res.label);
      break;
    case ClassifyStatus::Boundary:
      j["status"] = "boundary";
      break;
    case ClassifyStatus::Ambiguous:
      j["status"] = "ambiguous";
      break;
    case ClassifyStatus::Unclassified:
      j["status"] = "unclassified";
      break;
  }
  if (!res.labels.empty() && res.status != ClassifyStatus::Ok) {
    nlohmann::json all = nlohmann::json::array();
    for (const auto& l : res.labels) all.push_back(label_to_json(l));
    j["candidates"] = std::move(all);
  }
  j["budget_limited"] = res.budget_limited;
  if (!res.diagnostic.empty()) j["diagnostic"] = res.diagnostic;
  return j;
}

}  // namespace nek::geo
