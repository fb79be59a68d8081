#include <algorithm>
#include <map>
#include <set>

#include "fieldsym/canon.hpp"
#include "fieldsym/errors.hpp"

namespace fieldsym {

namespace {

bool is_pattern_atom(const ExprPtr& p) {
    switch (p->tag) {
        case ExprTag::Param:
        case ExprTag::Field:
        case ExprTag::ArbFn:
        case ExprTag::Coord:
            return true;
        default:
            return false;
    }
}

// Try to match an atom against a pattern atom. Symbolic pattern indices are
// wildcards and bind positionally; concrete pattern indices match exactly.
bool match_atom(const Expr& atom, const Expr& pattern,
                std::map<std::string, Index>* wildcard_bindings) {
    if (atom.tag != pattern.tag) return false;
    if (atom.name != pattern.name) return false;
    if (atom.components.size() != pattern.components.size()) return false;
    if (atom.derivs.size() != pattern.derivs.size()) return false;
    std::map<std::string, Index> local;
    auto bind = [&](const Index& a, const Index& p) {
        if (p.is_concrete()) return a.is_concrete() && a.concrete == p.concrete;
        auto [it, inserted] = local.emplace(p.name, a);
        if (!inserted) return it->second == a;
        return true;
    };
    for (size_t i = 0; i < pattern.components.size(); ++i)
        if (!bind(atom.components[i], pattern.components[i])) return false;
    for (size_t i = 0; i < pattern.derivs.size(); ++i)
        if (!bind(atom.derivs[i], pattern.derivs[i])) return false;
    *wildcard_bindings = std::move(local);
    return true;
}

ExprPtr rename_indices(const ExprPtr& e, const std::map<std::string, Index>& renames) {
    if (renames.empty()) return e;
    auto copy = std::make_shared<Expr>(*e);
    auto map_index = [&](Index& idx) {
        if (idx.is_concrete()) return;
        auto it = renames.find(idx.name);
        if (it != renames.end()) idx = it->second;
    };
    for (auto& idx : copy->components) map_index(idx);
    for (auto& idx : copy->derivs) map_index(idx);
    std::sort(copy->derivs.begin(), copy->derivs.end());
    std::vector<ExprPtr> children;
    children.reserve(copy->children.size());
    for (const auto& c : copy->children) children.push_back(rename_indices(c, renames));
    copy->children = std::move(children);
    return copy;
}

struct Substituter {
    const std::vector<Binding>& bindings;
    const Space& space;

    ExprPtr apply(const ExprPtr& e) {
        if (is_pattern_atom(e)) {
            for (const auto& b : bindings) {
                std::map<std::string, Index> wc;
                if (!match_atom(*e, *b.pattern, &wc)) continue;
                ExprPtr replacement = rename_indices(b.replacement, wc);
                validate_replacement(*e, replacement);
                return replacement;
            }
            return e;
        }
        if (e->children.empty()) return e;
        auto copy = std::make_shared<Expr>(*e);
        std::vector<ExprPtr> children;
        children.reserve(e->children.size());
        for (const auto& c : e->children) children.push_back(apply(c));
        copy->children = std::move(children);
        return copy;
    }

    void validate_replacement(const Expr& atom, const ExprPtr& replacement) const {
        ExprPtr canon = canonicalize(replacement, space);
        if (is_zero(canon)) return;  // the zero tensor fits any slot shape
        std::set<std::pair<IndexKind, std::string>> expected;
        for (const auto& idx : atom.components)
            if (!idx.is_concrete()) expected.insert({idx.kind, idx.name});
        for (const auto& idx : atom.derivs)
            if (!idx.is_concrete()) expected.insert({idx.kind, idx.name});
        std::set<std::pair<IndexKind, std::string>> got;
        for (const auto& idx : free_indices(canon)) got.insert({idx.kind, idx.name});
        if (expected != got)
            throw IndexMismatch("substitution changes the free-index structure of '" +
                                debug_string(std::make_shared<Expr>(atom)) + "'");
    }
};

}  // namespace

ExprPtr substitute(const ExprPtr& e, const std::vector<Binding>& bindings, const Space& space) {
    Substituter s{bindings, space};
    return canonicalize(s.apply(e), space);
}

ExprPtr drop_field_derivatives(const ExprPtr& e, const Space& space,
                               const std::set<std::string>& fields) {
    std::function<ExprPtr(const ExprPtr&)> walk = [&](const ExprPtr& n) -> ExprPtr {
        if (n->tag == ExprTag::Field && !n->derivs.empty() &&
            (fields.empty() || fields.count(n->name)))
            return zero();
        if (n->children.empty()) return n;
        auto copy = std::make_shared<Expr>(*n);
        std::vector<ExprPtr> children;
        children.reserve(n->children.size());
        for (const auto& c : n->children) children.push_back(walk(c));
        copy->children = std::move(children);
        return copy;
    };
    return canonicalize(walk(e), space);
}

namespace {

// First contracted (twice-occurring) symbolic index of the requested kind;
// free indices are left untouched by expansion.
const Index* find_symbolic_index(const std::vector<ExprPtr>& factors, bool internal_only) {
    std::map<std::pair<IndexKind, std::string>, std::pair<const Index*, int>> seen;
    for (const auto& f : factors) {
        auto scan = [&](const std::vector<Index>& slots) {
            for (const auto& idx : slots) {
                if (idx.is_concrete()) continue;
                if (internal_only && idx.kind != IndexKind::Internal) continue;
                auto& entry = seen[{idx.kind, idx.name}];
                entry.first = &idx;
                entry.second++;
            }
        };
        scan(f->components);
        scan(f->derivs);
    }
    for (const auto& [key, entry] : seen)
        if (entry.second == 2) return entry.first;
    return nullptr;
}

ExprPtr expand_indices_impl(const ExprPtr& e, const Space& space, bool internal_only) {
    ExprPtr canon = canonicalize(e, space);
    bool again = true;
    while (again) {
        again = false;
        std::vector<ExprPtr> new_terms;
        for (const auto& t : expr_terms(canon)) {
            const Index* idx = find_symbolic_index(t.factors, internal_only);
            if (idx == nullptr) {
                new_terms.push_back(term_to_expr(t));
                continue;
            }
            again = true;
            Index target = *idx;
            int lo = target.kind == IndexKind::Internal ? 1 : 0;
            int hi = target.kind == IndexKind::Internal ? target.range : space.dimension - 1;
            if (hi < lo) throw IndexViolation("index '" + target.name + "' has an empty range");
            for (int v = lo; v <= hi; ++v) {
                Index conc = target.kind == IndexKind::Internal
                                 ? Index::internal_c(v, target.range)
                                 : Index::spacetime_c(v);
                std::map<std::string, Index> rename{{target.name, conc}};
                ExprPtr mapped = rename_indices(term_to_expr(t), rename);
                new_terms.push_back(mapped);
            }
        }
        canon = canonicalize(make_sum(std::move(new_terms)), space);
    }
    return canon;
}

}  // namespace

ExprPtr rename_symbolic_index(const ExprPtr& e, const std::string& from, const Index& to) {
    return rename_indices(e, {{from, to}});
}

ExprPtr expand_internal_indices(const ExprPtr& e, const Space& space) {
    return expand_indices_impl(e, space, /*internal_only=*/true);
}

ExprPtr expand_all_indices(const ExprPtr& e, const Space& space) {
    return expand_indices_impl(e, space, /*internal_only=*/false);
}

}  // namespace fieldsym
