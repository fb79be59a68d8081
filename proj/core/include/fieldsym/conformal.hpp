#pragma once

#include "fieldsym/goldstone.hpp"

namespace fieldsym {

/// A model bundled with its scale and special-conformal transformation
/// family: one dilation plus one conformal member per spacetime direction.
struct ConformalScenario {
    ModelDef model;
    std::string ordinary;     // the ordinary scalar
    std::string dilaton;      // the scalar with the inhomogeneous shift
    std::string scale_param;  // the symmetry-breaking scale
    std::vector<std::string> bundle;  // transformation names, dilation first
};

/// Synthesize the transformation bundle (weight-w scalars, inhomogeneous
/// 1/f shift for the dilaton). Existing transformations with the same names
/// are checked for equivalence and reused. Throws MissingDilaton /
/// UnknownParameter on bad arguments.
ConformalScenario build_scenario(const ModelDef& m, const std::string& dilaton,
                                 const std::string& scale_param);

/// Outcome of solving one polynomial constraint row over the ordinary
/// scalar, with positive-definite prefactors stripped (parameters assumed
/// positive).
enum class SolveKind : std::uint8_t { AllValues, UniqueZero, NoSolution, Unsolved };

struct DilationSolve {
    SolveKind kind = SolveKind::Unsolved;
    std::string unknown;
    ExprPtr residual = zero();  // what could not be reduced
};

struct ConformalAnalysis {
    XDecomposition dilation;
    std::vector<std::pair<std::string, XDecomposition>> conformal;
    bool degeneracy_holds = false;  // each x^l part equals twice the dilation rows
    ConstraintSet antisymmetric_parts;  // constant parts of the conformal rows
    ConstraintSet extra;                // cross-derivative constraints
    DilationSolve solve;
    MassReport accounting;
    std::vector<std::string> notes;
};

/// Full scenario analysis at a constant vacuum: residual decompositions,
/// the x-part/dilation degeneracy, the symbolic solve of the dilation
/// constraint over the ordinary scalar, the extra constraints, and the
/// Goldstone accounting.
ConformalAnalysis analyze_scenario(const ConformalScenario& s, const VacuumConfig& v);

struct Multiplicity {
    int broken = 0;
    int goldstone = 0;
    int extra_constraints = 0;
};

/// Counts: transformations acting nontrivially at the vacuum (including
/// x-dependent action), distinct Goldstone directions among their constant
/// parts, and the number of extra cross-derivative constraints.
Multiplicity goldstone_multiplicity(const ConformalScenario& s, const VacuumConfig& v);

}  // namespace fieldsym
