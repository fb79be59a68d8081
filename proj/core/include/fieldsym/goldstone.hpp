#pragma once

#include <map>

#include "fieldsym/symmetry.hpp"
#include "fieldsym/variational.hpp"

namespace fieldsym {

/// One labeled symbolic constraint with its canonicalized residual.
struct LabeledConstraint {
    std::string label;
    ExprPtr expr = zero();
    bool satisfied = false;  // expr canonicalizes to zero
    std::string note;
};
using ConstraintSet = std::vector<LabeledConstraint>;

/// Flat component labels ("phi[1]", "A[0]", "sigma") in declaration order.
std::vector<std::string> component_labels(const ModelDef& m);

struct ExtremumReport {
    bool extremum = false;
    double tolerance = 1e-9;
    std::vector<std::string> labels;
    std::vector<double> gradient;
    double max_abs = 0.0;
};

struct MassReport {
    std::vector<std::string> labels;
    std::vector<double> matrix;       // row-major Hessian of the potential
    std::vector<double> eigenvalues;  // ascending
    double zero_tolerance = 0.0;
    int zero_count = 0;

    // Goldstone accounting (populated by goldstone_count).
    struct DirectionCheck {
        std::string transform;
        std::vector<double> direction;  // constant part of Delta at the vacuum
        bool nonzero = false;
        double mass_residual = 0.0;  // max-norm of (matrix . direction)
    };
    std::vector<DirectionCheck> checks;
    int broken_generators = 0;
    int goldstone_modes = 0;
    std::vector<std::vector<double>> goldstone_directions;  // orthonormal span basis
    // Transform names grouped by shared null direction (the x-symmetry
    // degeneracy phenomenon).
    std::vector<std::vector<std::string>> degenerate_groups;
};

/// Potential of a scalars-only model: minus the derivative-free part of the
/// Lagrangian. Throws NoPotential when a vector field is declared.
ExprPtr extract_potential(const ModelDef& m);

ExprPtr potential_gradient_entry(const ModelDef& m, const std::string& field,
                                 const std::vector<int>& components);

ExtremumReport check_extremum(const ModelDef& m, const VacuumConfig& v, double tol = 1e-9);

/// Numeric Hessian of the potential at the vacuum with eigen-decomposition.
MassReport mass_matrix(const ModelDef& m, const VacuumConfig& v);

struct GoldstoneOptions {
    bool require_verified = true;  // SymmetryNotVerified unless overridden
    double mass_residual_tol = 1e-10;
};

/// Mass matrix plus broken-generator counting over a transformation set.
MassReport goldstone_count(const ModelDef& m, const VacuumConfig& v,
                           const std::vector<const Transformation*>& ts,
                           const GoldstoneOptions& opts = {});

/// Constant part of a transformation's direction at a vacuum: one number per
/// component, with eps0 normalized to one and explicit coordinates set to
/// zero (only the x-independent part of the direction survives).
std::vector<double> direction_at_vacuum(const ModelDef& m, const Transformation& t,
                                        const VacuumConfig& v);

/// The contracted second variation at a constant configuration, decomposed
/// by monomials in the explicit coordinates (degree <= 1). Key -1 holds the
/// x-independent part; key c >= 0 the coefficient of x(c). When `v` is
/// absent the fields stay symbolic.
struct XDecomposition {
    std::vector<SecondVariationRow> full;
    std::map<int, std::vector<SecondVariationRow>> parts;
};
XDecomposition generalized_residual(const ModelDef& m, const Transformation& t,
                                    const std::optional<VacuumConfig>& v);

/// The cross-derivative compatibility constraints between the ordinary
/// scalar and the dilaton: one per spacetime direction.
ConstraintSet extra_constraints(const ModelDef& m, const std::string& ordinary = "",
                                const std::string& dilaton = "");

}  // namespace fieldsym
