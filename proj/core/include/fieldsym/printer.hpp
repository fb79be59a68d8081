#pragma once

#include <set>
#include <string>

#include "fieldsym/model.hpp"

namespace fieldsym {

/// Render a canonical expression as model-file syntax. Machine-named dummy
/// indices are mapped to a readable pool, avoiding `reserved` names (free
/// indices, field and parameter names are always avoided).
std::string print_expr(const ExprPtr& e, const std::set<std::string>& reserved = {});

/// Canonical text form of a model; parse_model(print_model(m)) == m.
std::string print_model(const ModelDef& m);

}  // namespace fieldsym
