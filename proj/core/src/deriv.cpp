#include "fieldsym/deriv.hpp"

#include <algorithm>
#include <set>

#include "fieldsym/errors.hpp"

namespace fieldsym {

namespace {

// Delta of the right kind between two index slots.
ExprPtr slot_delta(const Index& a, const Index& b) {
    if (a.kind != b.kind) throw IndexViolation("delta between indices of different kinds");
    return make_delta(a, b);
}

// Ordered-bijection matching of two derivative multisets: the sum over all
// pairings of delta products. Sizes must agree (checked by the caller).
std::vector<std::vector<ExprPtr>> deriv_matchings(const std::vector<Index>& atom_derivs,
                                                  const std::vector<Index>& target_derivs) {
    std::vector<std::vector<ExprPtr>> out;
    std::vector<size_t> perm(target_derivs.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end());
    do {
        std::vector<ExprPtr> deltas;
        deltas.reserve(atom_derivs.size());
        for (size_t i = 0; i < atom_derivs.size(); ++i)
            deltas.push_back(slot_delta(atom_derivs[i], target_derivs[perm[i]]));
        out.push_back(std::move(deltas));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

struct FieldDiff {
    const Expr& target;  // Field or ArbFn atom
    const Space& space;

    ExprPtr diff(const ExprPtr& e) const {
        switch (e->tag) {
            case ExprTag::Number:
            case ExprTag::Param:
            case ExprTag::Coord:
            case ExprTag::Metric:
            case ExprTag::Epsilon:
            case ExprTag::Delta:
                return zero();
            case ExprTag::Field:
            case ExprTag::ArbFn:
                return diff_atom(*e);
            case ExprTag::Trig: {
                if (target.tag != ExprTag::Field || e->name != target.name ||
                    !target.components.empty() || !target.derivs.empty())
                    return zero();
                // d cos(f)/df = -sin(f); d sin(f)/df = cos(f)
                if (e->trig == TrigKind::Cos)
                    return make_product(Rational(-1), {make_trig(TrigKind::Sin, e->name)});
                return make_trig(TrigKind::Cos, e->name);
            }
            case ExprTag::ExpFunc: {
                ExprPtr inner = diff(e->children[0]);
                if (is_zero(inner)) return zero();
                return make_product(Rational(1), {e, inner});
            }
            case ExprTag::Power: {
                ExprPtr inner = diff(e->children[0]);
                if (is_zero(inner)) return zero();
                return make_product(Rational(e->exponent),
                                    {make_power(e->children[0], e->exponent - 1), inner});
            }
            case ExprTag::Product: {
                std::vector<ExprPtr> terms;
                for (size_t k = 0; k < e->children.size(); ++k) {
                    ExprPtr dk = diff(e->children[k]);
                    if (is_zero(dk)) continue;
                    std::vector<ExprPtr> factors;
                    factors.reserve(e->children.size());
                    for (size_t j = 0; j < e->children.size(); ++j)
                        factors.push_back(j == k ? dk : e->children[j]);
                    terms.push_back(make_product(e->number, std::move(factors)));
                }
                if (terms.empty()) return zero();
                return make_sum(std::move(terms));
            }
            case ExprTag::Sum: {
                std::vector<ExprPtr> terms;
                for (const auto& c : e->children) {
                    ExprPtr dc = diff(c);
                    if (!is_zero(dc)) terms.push_back(dc);
                }
                if (terms.empty()) return zero();
                return make_sum(std::move(terms));
            }
        }
        return zero();
    }

    ExprPtr diff_atom(const Expr& atom) const {
        if (atom.tag != target.tag) return zero();
        if (atom.name != target.name) return zero();
        if (atom.components.size() != target.components.size()) return zero();
        if (atom.derivs.size() != target.derivs.size()) return zero();
        std::vector<ExprPtr> component_deltas;
        for (size_t i = 0; i < atom.components.size(); ++i)
            component_deltas.push_back(slot_delta(atom.components[i], target.components[i]));
        if (atom.derivs.empty()) {
            if (component_deltas.empty()) return one();
            return make_product(Rational(1), std::move(component_deltas));
        }
        std::vector<ExprPtr> terms;
        for (auto& matching : deriv_matchings(atom.derivs, target.derivs)) {
            std::vector<ExprPtr> factors = component_deltas;
            factors.insert(factors.end(), matching.begin(), matching.end());
            if (factors.empty())
                terms.push_back(one());
            else
                terms.push_back(make_product(Rational(1), std::move(factors)));
        }
        return make_sum(std::move(terms));
    }
};

struct SpacetimeDeriv {
    Index mu;
    const Space& space;

    ExprPtr d(const ExprPtr& e) const {
        switch (e->tag) {
            case ExprTag::Number:
            case ExprTag::Param:
            case ExprTag::Metric:
            case ExprTag::Epsilon:
            case ExprTag::Delta:
                return zero();
            case ExprTag::Coord:
                return make_delta(mu, e->components[0]);
            case ExprTag::Field: {
                auto derivs = e->derivs;
                derivs.push_back(mu);
                return make_field(e->name, e->components, std::move(derivs));
            }
            case ExprTag::ArbFn: {
                auto derivs = e->derivs;
                derivs.push_back(mu);
                return make_arbfn(e->name, std::move(derivs));
            }
            case ExprTag::Trig: {
                ExprPtr darg = make_field(e->name, {}, {mu});
                if (e->trig == TrigKind::Cos)
                    return make_product(Rational(-1), {make_trig(TrigKind::Sin, e->name), darg});
                return make_product(Rational(1), {make_trig(TrigKind::Cos, e->name), darg});
            }
            case ExprTag::ExpFunc: {
                ExprPtr inner = d(e->children[0]);
                if (is_zero(inner)) return zero();
                return make_product(Rational(1), {e, inner});
            }
            case ExprTag::Power: {
                ExprPtr inner = d(e->children[0]);
                if (is_zero(inner)) return zero();
                return make_product(Rational(e->exponent),
                                    {make_power(e->children[0], e->exponent - 1), inner});
            }
            case ExprTag::Product: {
                std::vector<ExprPtr> terms;
                for (size_t k = 0; k < e->children.size(); ++k) {
                    ExprPtr dk = d(e->children[k]);
                    if (is_zero(dk)) continue;
                    std::vector<ExprPtr> factors;
                    for (size_t j = 0; j < e->children.size(); ++j)
                        factors.push_back(j == k ? dk : e->children[j]);
                    terms.push_back(make_product(e->number, std::move(factors)));
                }
                if (terms.empty()) return zero();
                return make_sum(std::move(terms));
            }
            case ExprTag::Sum: {
                std::vector<ExprPtr> terms;
                for (const auto& c : e->children) {
                    ExprPtr dc = d(c);
                    if (!is_zero(dc)) terms.push_back(dc);
                }
                if (terms.empty()) return zero();
                return make_sum(std::move(terms));
            }
        }
        return zero();
    }
};

void validate_target(const Expr& target) {
    if (target.tag != ExprTag::Field && target.tag != ExprTag::ArbFn)
        throw ValidationError("differentiation target must be a field or gauge-function atom");
    std::set<std::string> seen;
    auto check = [&](const Index& idx) {
        if (idx.is_concrete()) return;
        if (!seen.insert(idx.name).second)
            throw ValidationError("differentiation target must carry distinct indices");
    };
    for (const auto& idx : target.components) check(idx);
    for (const auto& idx : target.derivs) check(idx);
}

}  // namespace

ExprPtr diff_field(const ExprPtr& e, const ExprPtr& target, const Space& space) {
    validate_target(*target);
    // Canonical input guarantees machine-named dummies that cannot collide
    // with the target's fresh indices; free indices must stay disjoint too.
    ExprPtr canon = canonicalize(e, space);
    std::set<std::string> target_names;
    for (const auto& idx : target->components)
        if (!idx.is_concrete()) target_names.insert(idx.name);
    for (const auto& idx : target->derivs)
        if (!idx.is_concrete()) target_names.insert(idx.name);
    for (const auto& idx : free_indices(canon))
        if (target_names.count(idx.name))
            throw ValidationError("differentiation target index '" + idx.name +
                                  "' already occurs free in the expression");
    FieldDiff fd{*target, space};
    return canonicalize(fd.diff(canon), space);
}

ExprPtr spacetime_derivative(const ExprPtr& e, const Index& mu, const Space& space) {
    if (mu.kind != IndexKind::Spacetime)
        throw ValidationError("spacetime derivative index must be of spacetime kind");
    ExprPtr canon = canonicalize(e, space);
    SpacetimeDeriv sd{mu, space};
    return canonicalize(sd.d(canon), space);
}

}  // namespace fieldsym
