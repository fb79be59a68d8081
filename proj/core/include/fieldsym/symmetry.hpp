#pragma once

#include "fieldsym/variational.hpp"

namespace fieldsym {

enum class SymmetryStatus : std::uint8_t { Invariant, InvariantUpToBoundary, Broken };

/// Coefficients of the gauge-function jet {theta, d theta, d d theta} in a
/// variation. First-order coefficients carry the free index theta_index_1;
/// second-order ones carry {theta_index_1, theta_index_2} and are stored
/// symmetrized (only the symmetric projection is observable against the
/// symmetric derivative pair).
struct ThetaJet {
    ExprPtr c0 = zero();
    ExprPtr c1 = zero();
    ExprPtr c2 = zero();
    static Index theta_index_1();
    static Index theta_index_2();

    bool all_zero() const { return is_zero(c0) && is_zero(c1) && is_zero(c2); }
};

/// Split a theta-linear expression into jet coefficients. Throws
/// ThetaOrderExceeded when a third derivative of theta survives
/// canonicalization, and ValidationError when a term carries no theta.
ThetaJet extract_theta_jet(const ExprPtr& e, const Space& space);

struct SymmetryVerdict {
    SymmetryStatus status = SymmetryStatus::Broken;
    ExprPtr residual = zero();               // canonical delta-L
    std::optional<BoundaryCurrent> current;  // for invariant-up-to-boundary
    std::optional<ThetaJet> coefficients;    // local transformations only
};

/// Invariance check for global and spacetime transformations: the variation
/// must vanish identically or be a total derivative (boundary term).
SymmetryVerdict verify_global(const ModelDef& m, const Transformation& t);

/// Invariance check for local transformations: every theta-jet coefficient
/// of the variation must vanish identically; a residual that is still a
/// total derivative counts as invariance up to a boundary term.
SymmetryVerdict verify_local(const ModelDef& m, const Transformation& t);

/// Dispatch on the transformation kind.
SymmetryVerdict verify_symmetry(const ModelDef& m, const Transformation& t);

}  // namespace fieldsym
