#pragma once

#include "fieldsym/canon.hpp"
#include "fieldsym/expr.hpp"

namespace fieldsym {

/// Formal partial derivative of e with respect to a Field or ArbFn atom,
/// treating each distinct atom (field name + derivative order) as an
/// independent variable. The target's symbolic indices must be fresh; the
/// result carries them as free indices, with Kronecker deltas produced on
/// both internal and spacetime slots. Matching of derivative multisets uses
/// the ordered-bijection convention (each matching contributes one delta
/// product), which pairs with the 1/k! weights in the variational operators.
ExprPtr diff_field(const ExprPtr& e, const ExprPtr& target, const Space& space);

/// Total spacetime derivative d/dx^mu via the chain rule: raises field and
/// gauge-function derivative multisets, differentiates explicit coordinates
/// to deltas, and applies the Leibniz and chain rules through products,
/// powers, exponentials and the trig atoms.
ExprPtr spacetime_derivative(const ExprPtr& e, const Index& mu, const Space& space);

}  // namespace fieldsym
