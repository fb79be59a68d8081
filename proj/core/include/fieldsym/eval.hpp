#pragma once

#include <map>
#include <string>
#include <vector>

#include "fieldsym/expr.hpp"

namespace fieldsym {

/// Numeric assignment for every atom reachable after index expansion.
/// Field and gauge-function values are keyed by concrete component indices
/// and the sorted concrete derivative multiset.
struct NumericEnv {
    Space space;
    std::map<std::string, double> params;
    // key: (name, components, derivs) flattened to a string via atom_key().
    std::map<std::string, double> field_values;
    std::map<std::string, double> arbfn_values;
    std::vector<double> coords;  // x^mu, size = space.dimension (defaults to 0)
    // Values for free symbolic indices, when the expression is not a scalar.
    std::map<std::string, int> index_values;

    static std::string atom_key(const std::string& name, const std::vector<int>& components,
                                const std::vector<int>& derivs);
    void set_field(const std::string& name, const std::vector<int>& components,
                   const std::vector<int>& derivs, double value);
    void set_arbfn(const std::string& name, const std::vector<int>& derivs, double value);
};

/// Deterministic floating evaluation. Contracted indices are expanded over
/// their ranges before evaluation (plain sums; the metric appears as an
/// explicit factor with signature entries). Throws MissingAtom listing every
/// unassigned atom encountered.
double eval_numeric(const ExprPtr& e, const NumericEnv& env);

}  // namespace fieldsym
