#pragma once

#include <optional>

#include "fieldsym/model.hpp"

namespace fieldsym {

enum class VariationClass : std::uint8_t { IdenticallyZero, TotalDerivative, NonzeroResidual };

/// Boundary current K with one free spacetime index; contracting the
/// spacetime derivative with that index reproduces the classified input.
struct BoundaryCurrent {
    Index index;
    ExprPtr expr;
};

struct VariationResult {
    VariationClass classification = VariationClass::NonzeroResidual;
    ExprPtr residual = zero();                 // canonical input
    std::optional<BoundaryCurrent> current;    // exhibited when classification
                                               // is TotalDerivative and the
                                               // ansatz solve succeeds
};

/// Variational derivative of a scalar density with respect to one field,
/// including the higher-order terms needed when the density carries second
/// or third field derivatives. `component` supplies the free index for
/// vector/multiplet fields.
ExprPtr euler_lagrange_density(const ExprPtr& density, const FieldDecl& field,
                               const std::optional<Index>& component, const Space& space);

/// Equation-of-motion expression for a declared field of the model, with the
/// free component index named `component_name` (ignored for scalars).
ExprPtr euler_lagrange(const ModelDef& m, const std::string& field_name,
                       const std::string& component_name = "a0");

/// delta-L under the transformation: sum over fields of
/// dL/dPhi * Delta + dL/d(dPhi) * d(Delta).
ExprPtr first_variation(const ModelDef& m, const Transformation& t);

/// Exact decision: a scalar expression is a total spacetime derivative iff
/// its variational derivative with respect to every field (and every gauge
/// function) vanishes identically. When it is, a current is exhibited by an
/// exact linear solve over one-derivative-lower candidate monomials.
VariationResult is_total_derivative(const ExprPtr& e, const Space& space);

/// One row of the contracted second variation: the four-term operator
/// acting on the transformation direction, before any evaluation at a
/// configuration.
struct SecondVariationRow {
    std::string field;
    std::optional<Index> component;  // free index of expr for indexed fields
    ExprPtr expr;
};

std::vector<SecondVariationRow> second_variation_apply(const ModelDef& m,
                                                       const Transformation& t);

}  // namespace fieldsym
