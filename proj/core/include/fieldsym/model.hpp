#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fieldsym/canon.hpp"
#include "fieldsym/expr.hpp"

namespace fieldsym {

enum class FieldKind : std::uint8_t { Scalar, Vector, Multiplet };

struct FieldDecl {
    std::string name;
    FieldKind kind = FieldKind::Scalar;
    int multiplet_size = 0;      // Multiplet only
    Rational weight{1};          // scale weight under dilations
    bool dilaton = false;

    /// Index for the component slot, or nothing for scalars.
    std::optional<Index> component_index(const std::string& symbol) const;
    /// All concrete component tuples (scalars yield one empty tuple).
    std::vector<std::vector<int>> component_tuples(const Space& space) const;
    /// Field atom with a concrete component tuple.
    ExprPtr atom(const std::vector<int>& components) const;
    /// Field atom with a symbolic component index (scalars ignore the name).
    ExprPtr atom_symbolic(const std::string& index_name) const;
};

enum class TransformKind : std::uint8_t { Global, Local, Spacetime };

/// The per-field symmetry direction. `component` names the free index of
/// `delta` for vector/multiplet fields.
struct DeltaRule {
    std::string field;
    std::optional<Index> component;
    ExprPtr delta;
};

struct Transformation {
    std::string name;
    TransformKind kind = TransformKind::Global;
    std::vector<DeltaRule> deltas;

    const DeltaRule* rule_for(const std::string& field) const;
};

struct ModelDef {
    std::string name;
    Space space;
    std::vector<std::string> params;
    std::vector<FieldDecl> fields;
    ExprPtr lagrangian = zero();
    std::vector<Transformation> transforms;

    const FieldDecl* find_field(const std::string& n) const;
    const Transformation* find_transform(const std::string& n) const;
    bool has_param(const std::string& n) const;
    /// Total number of scalar components over all fields.
    int component_count() const;
};

/// A constant field assignment with exact parameter values.
struct VacuumConfig {
    // field name -> concrete component tuple -> value
    std::map<std::string, std::map<std::vector<int>, Rational>> values;
    std::map<std::string, Rational> params;

    Rational value_of(const std::string& field, const std::vector<int>& components) const;
    void set(const std::string& field, const std::vector<int>& components, Rational v);
};

/// Enforces every ModelDef and Transformation invariant; throws
/// ValidationError with a description of the first violation. Expressions
/// are canonicalized in place.
void validate_model(ModelDef& model);

/// Structural equality after canonicalization (used by round-trip tests).
bool models_equal(const ModelDef& a, const ModelDef& b);

/// Substitution bindings that freeze a model at a vacuum configuration:
/// every field component to its value, every parameter to its value, and
/// every field derivative to zero.
std::vector<Binding> vacuum_bindings(const ModelDef& model, const VacuumConfig& vacuum,
                                     bool bind_params = true);

/// Reserved names the DSL will not accept for params/fields/indices.
bool is_reserved_word(const std::string& word);

}  // namespace fieldsym
