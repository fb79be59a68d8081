#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "fieldsym/expr.hpp"

namespace fieldsym {

/// Canonical form: fully expanded polynomial over atoms with flattened
/// n-ary sums/products, like terms merged, zero terms removed, contracted
/// (dummy) indices renamed to a canonical sequence, and symmetric /
/// antisymmetric index slots normalized. Idempotent.
///
/// Throws IndexViolation when an index occurs three or more times in one
/// product term, when contracted kinds disagree, or when the terms of a sum
/// carry different free indices.
ExprPtr canonicalize(const ExprPtr& e, const Space& space);
inline ExprPtr canonicalize(const ExprPtr& e) { return canonicalize(e, Space{}); }

/// True when the two expressions have identical canonical forms.
bool canonically_equal(const ExprPtr& a, const ExprPtr& b, const Space& space);

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

/// One substitution rule. The pattern is a Param, Field, ArbFn or Coord atom
/// whose symbolic indices act as wildcards (they bind to the matched atom's
/// indices and may be referenced by the replacement); concrete indices match
/// exactly. The derivative multiset must match in size.
struct Binding {
    ExprPtr pattern;
    ExprPtr replacement;
};

/// Simultaneous, non-recursive substitution followed by canonicalization.
/// Throws IndexMismatch when a replacement changes the free-index structure
/// of the atom it replaces.
ExprPtr substitute(const ExprPtr& e, const std::vector<Binding>& bindings, const Space& space);

/// Every first- and higher-order field derivative of the named fields -> 0.
/// With an empty field list, all field derivatives are dropped.
ExprPtr drop_field_derivatives(const ExprPtr& e, const Space& space,
                               const std::set<std::string>& fields = {});

// ---------------------------------------------------------------------------
// Index utilities
// ---------------------------------------------------------------------------

/// Free (once-occurring) symbolic indices of a canonical expression.
std::vector<Index> free_indices(const ExprPtr& e);

/// True when the expression has no free symbolic index (scalar).
bool is_scalar_expr(const ExprPtr& e);

/// Rename one symbolic index (free or dummy) throughout the tree.
ExprPtr rename_symbolic_index(const ExprPtr& e, const std::string& from, const Index& to);

/// Expand symbolic internal (multiplet) indices into concrete components,
/// summing contracted pairs. Spacetime indices are left untouched.
ExprPtr expand_internal_indices(const ExprPtr& e, const Space& space);

/// Expand all symbolic indices (spacetime over the space dimension, internal
/// over multiplet ranges) into concrete components. The result contains only
/// concrete-index atoms.
ExprPtr expand_all_indices(const ExprPtr& e, const Space& space);

/// Visit every atom node (Number/Param/Coord/Field/ArbFn/Metric/Epsilon/
/// Delta/Trig) of the expression tree.
void for_each_atom(const ExprPtr& e, const std::function<void(const Expr&)>& fn);

/// Collect the terms of a canonical expression as (coefficient, factor list)
/// pairs; a canonical non-sum expression yields one term.
struct Term {
    Rational coeff;
    std::vector<ExprPtr> factors;
};
std::vector<Term> expr_terms(const ExprPtr& e);
ExprPtr term_to_expr(const Term& t);

/// Exact rational coefficients c with target = sum_i c_i basis_i (canonical
/// term matching), or nothing when the target lies outside the span.
std::optional<std::vector<Rational>> match_linear_combination(const ExprPtr& target,
                                                              const std::vector<ExprPtr>& basis,
                                                              const Space& space);

}  // namespace fieldsym
