#include "fieldsym/model.hpp"

#include <algorithm>
#include <set>

#include "fieldsym/errors.hpp"

namespace fieldsym {

std::optional<Index> FieldDecl::component_index(const std::string& symbol) const {
    switch (kind) {
        case FieldKind::Scalar:
            return std::nullopt;
        case FieldKind::Vector:
            return Index::spacetime(symbol);
        case FieldKind::Multiplet:
            return Index::internal(symbol, static_cast<std::uint16_t>(multiplet_size));
    }
    return std::nullopt;
}

std::vector<std::vector<int>> FieldDecl::component_tuples(const Space& space) const {
    switch (kind) {
        case FieldKind::Scalar:
            return {{}};
        case FieldKind::Vector: {
            std::vector<std::vector<int>> out;
            for (int mu = 0; mu < space.dimension; ++mu) out.push_back({mu});
            return out;
        }
        case FieldKind::Multiplet: {
            std::vector<std::vector<int>> out;
            for (int i = 1; i <= multiplet_size; ++i) out.push_back({i});
            return out;
        }
    }
    return {{}};
}

ExprPtr FieldDecl::atom(const std::vector<int>& components) const {
    std::vector<Index> idx;
    if (kind == FieldKind::Vector) {
        idx.push_back(Index::spacetime_c(components.at(0)));
    } else if (kind == FieldKind::Multiplet) {
        idx.push_back(
            Index::internal_c(components.at(0), static_cast<std::uint16_t>(multiplet_size)));
    }
    return make_field(name, std::move(idx));
}

ExprPtr FieldDecl::atom_symbolic(const std::string& index_name) const {
    auto idx = component_index(index_name);
    if (!idx) return make_field(name);
    return make_field(name, {*idx});
}

const DeltaRule* Transformation::rule_for(const std::string& field) const {
    for (const auto& d : deltas)
        if (d.field == field) return &d;
    return nullptr;
}

const FieldDecl* ModelDef::find_field(const std::string& n) const {
    for (const auto& f : fields)
        if (f.name == n) return &f;
    return nullptr;
}

const Transformation* ModelDef::find_transform(const std::string& n) const {
    for (const auto& t : transforms)
        if (t.name == n) return &t;
    return nullptr;
}

bool ModelDef::has_param(const std::string& n) const {
    return std::find(params.begin(), params.end(), n) != params.end();
}

int ModelDef::component_count() const {
    int total = 0;
    for (const auto& f : fields) {
        switch (f.kind) {
            case FieldKind::Scalar:
                total += 1;
                break;
            case FieldKind::Vector:
                total += space.dimension;
                break;
            case FieldKind::Multiplet:
                total += f.multiplet_size;
                break;
        }
    }
    return total;
}

Rational VacuumConfig::value_of(const std::string& field,
                                const std::vector<int>& components) const {
    auto it = values.find(field);
    if (it == values.end()) return Rational(0);
    auto jt = it->second.find(components);
    if (jt == it->second.end()) return Rational(0);
    return jt->second;
}

void VacuumConfig::set(const std::string& field, const std::vector<int>& components, Rational v) {
    values[field][components] = v;
}

bool is_reserved_word(const std::string& word) {
    static const std::set<std::string> reserved = {
        "model",      "dimension", "signature", "param",  "field", "scalar", "vector",
        "weight",     "dilaton",   "lagrangian", "transform", "global", "local", "spacetime",
        "delta",      "d",         "g",         "eps",    "kd",    "x",      "exp",
        "theta",      "eps0",      "mostly",    "minus",  "plus"};
    return reserved.count(word) > 0;
}

namespace {

struct AtomScan {
    bool has_arbfn = false;
    bool has_coord = false;
    bool has_trig = false;
    int max_field_deriv = 0;
    int max_arbfn_deriv = 0;
    std::set<std::string> field_names;
    std::set<std::string> param_names;
};

AtomScan scan_atoms(const ExprPtr& e) {
    AtomScan s;
    for_each_atom(e, [&](const Expr& a) {
        switch (a.tag) {
            case ExprTag::ArbFn:
                s.has_arbfn = true;
                s.max_arbfn_deriv = std::max(s.max_arbfn_deriv, static_cast<int>(a.derivs.size()));
                break;
            case ExprTag::Coord:
                s.has_coord = true;
                break;
            case ExprTag::Trig:
                s.has_trig = true;
                s.field_names.insert(a.name);
                break;
            case ExprTag::Field:
                s.field_names.insert(a.name);
                s.max_field_deriv = std::max(s.max_field_deriv, static_cast<int>(a.derivs.size()));
                break;
            case ExprTag::Param:
                s.param_names.insert(a.name);
                break;
            default:
                break;
        }
    });
    return s;
}

}  // namespace

void validate_model(ModelDef& model) {
    if (model.space.dimension < 1) throw ValidationError("dimension must be a positive integer");

    std::set<std::string> names;
    for (const auto& p : model.params) {
        if (!names.insert(p).second) throw ValidationError("duplicate parameter '" + p + "'");
    }
    for (const auto& f : model.fields) {
        if (!names.insert(f.name).second)
            throw ValidationError("duplicate declaration of '" + f.name + "'");
        if (f.kind == FieldKind::Multiplet && f.multiplet_size < 1)
            throw ValidationError("multiplet size of '" + f.name + "' must be >= 1");
    }

    model.lagrangian = canonicalize(model.lagrangian, model.space);
    AtomScan scan = scan_atoms(model.lagrangian);
    if (scan.has_arbfn)
        throw ValidationError("Lagrangian must not reference the gauge function theta");
    if (scan.has_coord)
        throw ValidationError("Lagrangian must not depend explicitly on coordinates");
    if (scan.has_trig) throw ValidationError("Lagrangian must not contain trigonometric atoms");
    if (scan.max_field_deriv > 1)
        throw ValidationError("Lagrangian must be first order in field derivatives");
    for (const auto& f : scan.field_names)
        if (model.find_field(f) == nullptr)
            throw ValidationError("Lagrangian references undeclared field '" + f + "'");
    for (const auto& p : scan.param_names)
        if (!model.has_param(p) && p != "eps0")
            throw ValidationError("Lagrangian references undeclared parameter '" + p + "'");
    if (!is_scalar_expr(model.lagrangian))
        throw ValidationError("Lagrangian must be a scalar");

    std::set<std::string> transform_names;
    for (auto& t : model.transforms) {
        if (!transform_names.insert(t.name).second)
            throw ValidationError("duplicate transformation '" + t.name + "'");
        std::set<std::string> delta_fields;
        bool theta_somewhere = false;
        bool coord_somewhere = false;
        for (auto& rule : t.deltas) {
            const FieldDecl* decl = model.find_field(rule.field);
            if (decl == nullptr)
                throw ValidationError("transformation '" + t.name +
                                      "' references undeclared field '" + rule.field + "'");
            if (!delta_fields.insert(rule.field).second)
                throw ValidationError("transformation '" + t.name + "' repeats field '" +
                                      rule.field + "'");
            rule.delta = canonicalize(rule.delta, model.space);
            AtomScan ds = scan_atoms(rule.delta);
            theta_somewhere |= ds.has_arbfn;
            coord_somewhere |= ds.has_coord;
            for (const auto& fn : ds.field_names)
                if (model.find_field(fn) == nullptr)
                    throw ValidationError("delta for '" + rule.field +
                                          "' references undeclared field '" + fn + "'");
            for (const auto& p : ds.param_names)
                if (!model.has_param(p) && p != "eps0")
                    throw ValidationError("delta for '" + rule.field +
                                          "' references undeclared parameter '" + p + "'");
            if (ds.max_field_deriv > 1)
                throw ValidationError("delta for '" + rule.field +
                                      "' may depend on first field derivatives at most");
            switch (t.kind) {
                case TransformKind::Global:
                    if (ds.has_arbfn)
                        throw ValidationError("global transformation '" + t.name +
                                              "' must not use theta");
                    if (ds.has_coord)
                        throw ValidationError("global transformation '" + t.name +
                                              "' must not depend on coordinates");
                    break;
                case TransformKind::Local:
                    if (ds.has_coord)
                        throw ValidationError("local transformation '" + t.name +
                                              "' must not depend explicitly on coordinates");
                    if (ds.max_arbfn_deriv > 1)
                        throw ValidationError("local transformation '" + t.name +
                                              "' may use theta with first derivatives at most");
                    // Coefficient extraction relies on theta-linearity.
                    for (const auto& term : expr_terms(rule.delta)) {
                        int theta_factors = 0;
                        for (const auto& f : term.factors) {
                            if (f->tag == ExprTag::ArbFn) ++theta_factors;
                            if (f->tag == ExprTag::Power && f->children[0]->tag == ExprTag::ArbFn)
                                theta_factors += 2;
                        }
                        if (theta_factors != 1)
                            throw ValidationError("local transformation '" + t.name +
                                                  "' must be linear in theta");
                    }
                    break;
                case TransformKind::Spacetime:
                    if (ds.has_arbfn)
                        throw ValidationError("spacetime transformation '" + t.name +
                                              "' must not use theta");
                    break;
            }
            auto frees = free_indices(rule.delta);
            if (decl->kind == FieldKind::Scalar) {
                if (!frees.empty())
                    throw ValidationError("delta for scalar '" + rule.field +
                                          "' must not carry free indices");
            } else {
                if (!rule.component)
                    throw ValidationError("delta for '" + rule.field +
                                          "' must name its component index");
                bool ok = frees.empty();  // a vanishing delta matches any shape
                if (frees.size() == 1 && frees[0].name == rule.component->name &&
                    frees[0].kind == rule.component->kind)
                    ok = true;
                if (!ok)
                    throw ValidationError("delta for '" + rule.field +
                                          "' must have exactly the free index '" +
                                          rule.component->name + "'");
            }
        }
        if (t.kind == TransformKind::Local && !theta_somewhere)
            throw ValidationError("local transformation '" + t.name + "' never uses theta");
        if (t.kind == TransformKind::Spacetime && !coord_somewhere)
            throw ValidationError("spacetime transformation '" + t.name +
                                  "' never uses explicit coordinates");
    }

    int dilaton_count = 0;
    for (const auto& f : model.fields) dilaton_count += f.dilaton ? 1 : 0;
    if (dilaton_count > 1) throw ValidationError("at most one field may carry the dilaton flag");
}

bool models_equal(const ModelDef& a, const ModelDef& b) {
    if (a.name != b.name) return false;
    if (!(a.space == b.space)) return false;
    if (a.params != b.params) return false;
    if (a.fields.size() != b.fields.size()) return false;
    for (size_t i = 0; i < a.fields.size(); ++i) {
        const auto &fa = a.fields[i], &fb = b.fields[i];
        if (fa.name != fb.name || fa.kind != fb.kind || fa.multiplet_size != fb.multiplet_size ||
            !(fa.weight == fb.weight) || fa.dilaton != fb.dilaton)
            return false;
    }
    if (!canonically_equal(a.lagrangian, b.lagrangian, a.space)) return false;
    if (a.transforms.size() != b.transforms.size()) return false;
    for (size_t i = 0; i < a.transforms.size(); ++i) {
        const auto &ta = a.transforms[i], &tb = b.transforms[i];
        if (ta.name != tb.name || ta.kind != tb.kind) return false;
        if (ta.deltas.size() != tb.deltas.size()) return false;
        for (size_t k = 0; k < ta.deltas.size(); ++k) {
            const auto &da = ta.deltas[k], &db = tb.deltas[k];
            if (da.field != db.field) return false;
            ExprPtr rhs = db.delta;
            if (da.component && db.component && !(*da.component == *db.component))
                rhs = rename_symbolic_index(rhs, db.component->name, *da.component);
            if (!canonically_equal(da.delta, rhs, a.space)) return false;
        }
    }
    return true;
}

std::vector<Binding> vacuum_bindings(const ModelDef& model, const VacuumConfig& vacuum,
                                     bool bind_params) {
    std::vector<Binding> bindings;
    // Field derivatives vanish at a constant configuration; wildcard patterns
    // up to third order cover the variational descendants of a first-order
    // Lagrangian.
    for (const auto& f : model.fields) {
        std::optional<Index> comp = f.component_index(".c");
        std::vector<Index> comps;
        if (comp) comps.push_back(*comp);
        bindings.push_back({make_field(f.name, comps, {Index::spacetime(".d1")}), zero()});
        bindings.push_back(
            {make_field(f.name, comps, {Index::spacetime(".d1"), Index::spacetime(".d2")}),
             zero()});
        bindings.push_back({make_field(f.name, comps,
                                       {Index::spacetime(".d1"), Index::spacetime(".d2"),
                                        Index::spacetime(".d3")}),
                            zero()});
        for (const auto& tuple : f.component_tuples(model.space)) {
            bindings.push_back({f.atom(tuple), make_number(vacuum.value_of(f.name, tuple))});
        }
    }
    if (bind_params) {
        for (const auto& [p, v] : vacuum.params)
            bindings.push_back({make_param(p), make_number(v)});
    }
    return bindings;
}

}  // namespace fieldsym
