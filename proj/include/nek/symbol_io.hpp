#pragma once

#include "json.hpp"
#include "nek/cohomology.hpp"
#include "nek/dynamics.hpp"
#include "nek/geometry.hpp"
#include "nek/symbol.hpp"

namespace nek::sym {

// {"d": 2, "k_max": 8, "real": true,
//  "modes": [{"k": [1, 0], "expr": "(* (const 0 -0.5) a1)"}]}
nlohmann::json symbol_to_json(const SymbolFunction& f);
SymbolFunction symbol_from_json(const nlohmann::json& j);

}  // namespace nek::sym

namespace nek::dyn {

// {"kind": "symbol", "P": {...}, "include_h0": true}   or
// {"kind": "em", "A": [{...}, ...], "V": {...}}
nlohmann::json system_to_json(const HamiltonianSystem& sys);
HamiltonianSystem system_from_json(const nlohmann::json& j, int kmax_budget);

}  // namespace nek::dyn

namespace nek::coho {

nlohmann::json ledger_to_json(const std::vector<LedgerEntry>& ledger);
nlohmann::json normal_form_to_json(const NormalFormResult& nf);

}  // namespace nek::coho

namespace nek::geo {

nlohmann::json label_to_json(const ZoneLabel& label);
nlohmann::json classify_to_json(const ClassifyResult& res);

}  // namespace nek::geo
