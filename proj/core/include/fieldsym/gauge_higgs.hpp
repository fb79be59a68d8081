#pragma once

#include "fieldsym/goldstone.hpp"
#include "fieldsym/symmetry.hpp"

namespace fieldsym {

/// Recognized structure of an abelian gauge model: one vector field, one
/// two-component scalar multiplet, and a local transformation of the shape
/// delta A = d(theta), delta phi_i = charge * eps(i,j) phi_j theta.
struct GaugeShape {
    std::string gauge_field;
    std::string scalar_field;
    std::string transform;
    ExprPtr charge;             // rational times parameter monomial
    Rational kinetic_strength;  // k in  k * d phi . d phi  (the reference
                                // derivation uses k = 1)
};

GaugeShape detect_gauge_shape(const ModelDef& m);

struct GaugeConstraints {
    GaugeShape shape;
    ConstraintSet off_shell;   // fin1..fin5, plus the gauge-row second-order
                               // coefficient that must vanish identically
    ConstraintSet constant;    // fin1a..fin5a (scalar derivatives dropped)
    std::vector<std::string> notes;

    const LabeledConstraint* find(const std::string& label) const;
};

/// Free-index conventions for the reported constraint expressions.
Index gauge_row_index();    // alpha: the gauge-field row
Index scalar_row_index();   // i: the scalar row
Index theta_d1_index();     // first theta-derivative direction
Index theta_d2_index();     // second theta-derivative direction

/// The five local-symmetry constraint equations derived from the second
/// variation of the action, off shell and reduced at constant scalars.
GaugeConstraints derive_constraints(const ModelDef& m);

struct GaugeMassReport {
    ExprPtr mass_tensor = zero();           // d2L/dA dA, free gauge-row indices
    ExprPtr mass_tensor_via_fin3 = zero();  // the constraint-substitution route
    bool routes_agree = false;
    bool proportional_to_metric = false;
    ExprPtr mass_squared_expr = zero();     // scalar coefficient of the metric
    double mass_squared = 0.0;
    double mass = 0.0;
    bool proca_sign_ok = false;             // nonnegative mass-squared
    std::vector<std::string> notes;
};

/// Gauge-boson mass from the second derivative of the Lagrangian in the
/// gauge field, cross-checked against the constraint-substitution route and
/// evaluated at the vacuum. Throws NotProportional when the mass tensor is
/// not a multiple of the metric.
GaugeMassReport gauge_mass(const ModelDef& m, const VacuumConfig& v);

/// The two contracted identities obtained by applying eps phi to the
/// constant-scalar constraints; the second one holds modulo the scalar
/// equation of motion at constant fields, which is reported in the note.
/// When a vacuum is given, each identity is also evaluated there (gauge
/// field left symbolic) and the evaluated expression is appended.
ConstraintSet residual_identities(const ModelDef& m,
                                  const std::optional<VacuumConfig>& v = std::nullopt);

struct PolarReport {
    bool has_gauge_field = false;
    int shift_orientation = 0;      // B = A + s * d(xi); 0 when no gauge field
    ExprPtr rewritten = zero();     // the Lagrangian after polar (+ shift)
    ExprPtr dL_dxi = zero();        // partial in the angular field
    ExprPtr dL_ddxi = zero();       // partial in its gradient (free index)
    bool angular_field_absent = false;      // dL/dxi == 0
    bool angular_gradient_absent = false;   // dL/d(d xi) == 0 after the shift
    std::optional<ThetaJet> polar_jet;      // gauge-condition coefficients in
                                            // the new variables
    ExprPtr radial_gauge_mass_tensor = zero();  // d2L/dB dB after the rewrite
    std::vector<std::string> notes;
};

/// Polar rewrite phi = (rho cos xi, rho sin xi) followed by the invariant
/// gauge-field shift; verifies that the angular mode disappears from the
/// gauged model and survives (gradient-coupled) in the ungauged one.
PolarReport eliminate_would_be_goldstone(const ModelDef& m);

}  // namespace fieldsym
