#include "fieldsym/variational.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fieldsym/deriv.hpp"
#include "fieldsym/errors.hpp"

namespace fieldsym {

namespace {

// Reserved fresh-index names used by the variational operators. The
// canonical renamer only emits .s/.i/.p names, so these never collide.
Index fresh_st(int k) { return Index::spacetime(".v" + std::to_string(k)); }

// Highest derivative order an expression carries for a given field name.
int max_deriv_order(const ExprPtr& e, const std::string& field, bool arbfn) {
    int order = 0;
    for_each_atom(e, [&](const Expr& a) {
        bool matches = arbfn ? (a.tag == ExprTag::ArbFn && a.name == field)
                             : (a.tag == ExprTag::Field && a.name == field);
        if (matches) order = std::max(order, static_cast<int>(a.derivs.size()));
    });
    return order;
}

ExprPtr euler_lagrange_impl(const ExprPtr& density, const std::string& name, bool arbfn,
                            const std::vector<Index>& component_slot, const Space& space) {
    ExprPtr canon = canonicalize(density, space);
    int max_order = max_deriv_order(canon, name, arbfn);
    std::vector<ExprPtr> pieces;
    Rational factorial(1);
    for (int k = 0; k <= max_order; ++k) {
        if (k > 0) factorial *= Rational(k);
        std::vector<Index> derivs;
        for (int j = 0; j < k; ++j) derivs.push_back(fresh_st(j));
        ExprPtr target =
            arbfn ? make_arbfn(name, derivs) : make_field(name, component_slot, derivs);
        ExprPtr w = diff_field(canon, target, space);
        if (is_zero(w)) continue;
        // Outer derivatives contract against the indices the differentiation
        // freed; the 1/k! compensates the ordered multiset matching.
        for (int j = 0; j < k; ++j) w = spacetime_derivative(w, fresh_st(j), space);
        Rational sign = (k % 2 == 0) ? Rational(1) : Rational(-1);
        pieces.push_back(make_product(sign / factorial, {w}));
    }
    if (pieces.empty()) return zero();
    return canonicalize(make_sum(std::move(pieces)), space);
}

}  // namespace

ExprPtr euler_lagrange_density(const ExprPtr& density, const FieldDecl& field,
                               const std::optional<Index>& component, const Space& space) {
    if ((field.kind != FieldKind::Scalar) != component.has_value())
        throw ValidationError("component index must be given exactly for indexed fields");
    std::vector<Index> slot;
    if (component) slot.push_back(*component);
    return euler_lagrange_impl(density, field.name, /*arbfn=*/false, slot, space);
}

ExprPtr euler_lagrange(const ModelDef& m, const std::string& field_name,
                       const std::string& component_name) {
    const FieldDecl* decl = m.find_field(field_name);
    if (decl == nullptr) throw UnknownField("unknown field '" + field_name + "'");
    return euler_lagrange_density(m.lagrangian, *decl, decl->component_index(component_name),
                                  m.space);
}

ExprPtr first_variation(const ModelDef& m, const Transformation& t) {
    std::vector<ExprPtr> pieces;
    for (const auto& field : m.fields) {
        const DeltaRule* rule = t.rule_for(field.name);
        if (rule == nullptr || is_zero(rule->delta)) continue;
        std::optional<Index> comp = field.component_index(".v8");
        std::vector<Index> slot;
        if (comp) slot.push_back(*comp);
        ExprPtr delta = rule->delta;
        if (comp && rule->component)
            delta = rename_symbolic_index(delta, rule->component->name, *comp);

        ExprPtr d_phi = diff_field(m.lagrangian, make_field(field.name, slot), m.space);
        if (!is_zero(d_phi)) pieces.push_back(make_product(Rational(1), {d_phi, delta}));

        Index mu = fresh_st(9);
        ExprPtr d_dphi = diff_field(m.lagrangian, make_field(field.name, slot, {mu}), m.space);
        if (!is_zero(d_dphi)) {
            ExprPtr ddelta = spacetime_derivative(delta, mu, m.space);
            if (!is_zero(ddelta)) pieces.push_back(make_product(Rational(1), {d_dphi, ddelta}));
        }
    }
    if (pieces.empty()) return zero();
    return canonicalize(make_sum(std::move(pieces)), m.space);
}

// ---------------------------------------------------------------------------
// Total-derivative decision and current exhibition
// ---------------------------------------------------------------------------

namespace {

struct AtomNames {
    std::set<std::string> fields;
    std::set<std::string> arbfns;
};

AtomNames collect_names(const ExprPtr& e) {
    AtomNames names;
    for_each_atom(e, [&](const Expr& a) {
        if (a.tag == ExprTag::Field) names.fields.insert(a.name);
        if (a.tag == ExprTag::ArbFn) names.arbfns.insert(a.name);
    });
    return names;
}

// Component-slot shape a field name is used with in the expression.
std::vector<Index> component_slot_of(const ExprPtr& e, const std::string& field) {
    std::vector<Index> slot;
    for_each_atom(e, [&](const Expr& a) {
        if (a.tag == ExprTag::Field && a.name == field && !a.components.empty() && slot.empty()) {
            Index idx = a.components[0];
            if (idx.is_concrete()) {
                idx = idx.kind == IndexKind::Spacetime ? Index::spacetime(".v7")
                                                       : Index::internal(".v7", idx.range);
            } else {
                idx.name = ".v7";
            }
            slot = {idx};
        }
    });
    return slot;
}

bool annihilated_by_euler_operator(const ExprPtr& e, const Space& space) {
    AtomNames names = collect_names(e);
    for (const auto& f : names.fields) {
        std::vector<Index> slot = component_slot_of(e, f);
        if (!is_zero(euler_lagrange_impl(e, f, /*arbfn=*/false, slot, space))) return false;
    }
    for (const auto& f : names.arbfns) {
        if (!is_zero(euler_lagrange_impl(e, f, /*arbfn=*/true, {}, space))) return false;
    }
    return true;
}

const char* kCurrentIndexName = ".kcur";

// Candidate current monomials whose divergences may span the input: one
// derivative index stripped from each derivative-bearing factor, plus
// explicit-coordinate multiples for dimension-counting pieces.
std::vector<ExprPtr> current_candidates(const ExprPtr& residual, const Space& space) {
    std::vector<ExprPtr> out;
    auto push_unique = [&](const ExprPtr& cand) {
        ExprPtr canon = canonicalize(cand, space);
        if (is_zero(canon)) return;
        for (const auto& existing : out)
            if (structurally_equal(existing, canon)) return;
        out.push_back(canon);
    };

    Index kidx = Index::spacetime(kCurrentIndexName);
    for (const auto& term : expr_terms(residual)) {
        {
            auto fs = term.factors;
            fs.push_back(make_coord(kidx));
            push_unique(make_product(term.coeff, fs));
        }
        for (size_t fi = 0; fi < term.factors.size(); ++fi) {
            const Expr& f = *term.factors[fi];
            if ((f.tag != ExprTag::Field && f.tag != ExprTag::ArbFn) || f.derivs.empty()) continue;
            std::set<std::string> tried;
            for (size_t di = 0; di < f.derivs.size(); ++di) {
                const Index& mu = f.derivs[di];
                if (!tried.insert(mu.str()).second) continue;
                std::vector<Index> reduced;
                for (size_t j = 0; j < f.derivs.size(); ++j)
                    if (j != di) reduced.push_back(f.derivs[j]);
                ExprPtr lowered = f.tag == ExprTag::Field
                                      ? make_field(f.name, f.components, reduced)
                                      : make_arbfn(f.name, reduced);
                std::vector<ExprPtr> factors;
                for (size_t j = 0; j < term.factors.size(); ++j)
                    factors.push_back(j == fi ? lowered : term.factors[j]);
                ExprPtr cand;
                if (mu.is_concrete()) {
                    factors.push_back(make_delta(kidx, mu));
                    cand = make_product(term.coeff, factors);
                } else {
                    cand = rename_symbolic_index(make_product(term.coeff, factors), mu.name, kidx);
                }
                push_unique(cand);
            }
        }
    }
    return out;
}

using MonomialKey = std::string;

std::map<MonomialKey, Rational> term_map(const ExprPtr& canon) {
    std::map<MonomialKey, Rational> m;
    for (const auto& t : expr_terms(canon)) {
        Term factors_only{Rational(1), t.factors};
        m[debug_string(term_to_expr(factors_only))] = t.coeff;
    }
    return m;
}

// Exact dense rational solve of A c = b; empty result when inconsistent.
std::optional<std::vector<Rational>> solve_rational(std::vector<std::vector<Rational>> a,
                                                    std::vector<Rational> b) {
    const size_t rows = a.size();
    const size_t cols = rows ? a[0].size() : 0;
    std::vector<int> pivot_col_of_row;
    size_t row = 0;
    for (size_t col = 0; col < cols && row < rows; ++col) {
        size_t sel = row;
        while (sel < rows && a[sel][col].is_zero()) ++sel;
        if (sel == rows) continue;
        std::swap(a[sel], a[row]);
        std::swap(b[sel], b[row]);
        Rational inv = Rational(1) / a[row][col];
        for (size_t j = col; j < cols; ++j) a[row][j] *= inv;
        b[row] *= inv;
        for (size_t r = 0; r < rows; ++r) {
            if (r == row || a[r][col].is_zero()) continue;
            Rational factor = a[r][col];
            for (size_t j = col; j < cols; ++j) a[r][j] -= factor * a[row][j];
            b[r] -= factor * b[row];
        }
        pivot_col_of_row.push_back(static_cast<int>(col));
        ++row;
    }
    for (size_t r = row; r < rows; ++r)
        if (!b[r].is_zero()) return std::nullopt;
    std::vector<Rational> c(cols, Rational(0));
    for (size_t r = 0; r < row; ++r) c[pivot_col_of_row[r]] = b[r];
    return c;
}

std::optional<BoundaryCurrent> exhibit_current(const ExprPtr& residual, const Space& space) {
    try {
        std::vector<ExprPtr> candidates = current_candidates(residual, space);
        if (candidates.empty() || candidates.size() > 400) return std::nullopt;
        Index kidx = Index::spacetime(kCurrentIndexName);

        std::vector<std::map<MonomialKey, Rational>> images;
        images.reserve(candidates.size());
        for (const auto& cand : candidates)
            images.push_back(term_map(spacetime_derivative(cand, kidx, space)));
        std::map<MonomialKey, Rational> target = term_map(residual);

        std::set<MonomialKey> keys;
        for (const auto& [k, v] : target) keys.insert(k);
        for (const auto& img : images)
            for (const auto& [k, v] : img) keys.insert(k);

        std::vector<std::vector<Rational>> a;
        std::vector<Rational> b;
        for (const auto& key : keys) {
            std::vector<Rational> arow;
            arow.reserve(candidates.size());
            for (const auto& img : images) {
                auto it = img.find(key);
                arow.push_back(it == img.end() ? Rational(0) : it->second);
            }
            a.push_back(std::move(arow));
            auto it = target.find(key);
            b.push_back(it == target.end() ? Rational(0) : it->second);
        }
        auto coeffs = solve_rational(std::move(a), std::move(b));
        if (!coeffs) return std::nullopt;

        std::vector<ExprPtr> pieces;
        for (size_t i = 0; i < candidates.size(); ++i) {
            if ((*coeffs)[i].is_zero()) continue;
            pieces.push_back(make_product((*coeffs)[i], {candidates[i]}));
        }
        ExprPtr current = pieces.empty() ? zero() : canonicalize(make_sum(pieces), space);
        // Exactness is verified, never assumed.
        ExprPtr check =
            canonicalize(make_sum({spacetime_derivative(current, kidx, space),
                                   make_product(Rational(-1), {residual})}),
                         space);
        if (!is_zero(check)) return std::nullopt;
        return BoundaryCurrent{kidx, current};
    } catch (const OverflowError&) {
        return std::nullopt;
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

std::optional<std::vector<Rational>> match_linear_combination(const ExprPtr& target,
                                                              const std::vector<ExprPtr>& basis,
                                                              const Space& space) {
    try {
        std::vector<std::map<MonomialKey, Rational>> images;
        images.reserve(basis.size());
        for (const auto& b : basis) images.push_back(term_map(canonicalize(b, space)));
        std::map<MonomialKey, Rational> want = term_map(canonicalize(target, space));
        std::set<MonomialKey> keys;
        for (const auto& [k, v] : want) keys.insert(k);
        for (const auto& img : images)
            for (const auto& [k, v] : img) keys.insert(k);
        std::vector<std::vector<Rational>> a;
        std::vector<Rational> b;
        for (const auto& key : keys) {
            std::vector<Rational> row;
            for (const auto& img : images) {
                auto it = img.find(key);
                row.push_back(it == img.end() ? Rational(0) : it->second);
            }
            a.push_back(std::move(row));
            auto it = want.find(key);
            b.push_back(it == want.end() ? Rational(0) : it->second);
        }
        return solve_rational(std::move(a), std::move(b));
    } catch (const OverflowError&) {
        return std::nullopt;
    }
}

VariationResult is_total_derivative(const ExprPtr& e, const Space& space) {
    VariationResult result;
    result.residual = canonicalize(e, space);
    if (!is_scalar_expr(result.residual))
        throw ValidationError("total-derivative classification requires a scalar expression");
    if (is_zero(result.residual)) {
        result.classification = VariationClass::IdenticallyZero;
        return result;
    }
    if (!annihilated_by_euler_operator(result.residual, space)) {
        result.classification = VariationClass::NonzeroResidual;
        return result;
    }
    result.classification = VariationClass::TotalDerivative;
    result.current = exhibit_current(result.residual, space);
    return result;
}

std::vector<SecondVariationRow> second_variation_apply(const ModelDef& m,
                                                       const Transformation& t) {
    std::vector<SecondVariationRow> rows;
    for (const auto& fa : m.fields) {
        SecondVariationRow row;
        row.field = fa.name;
        row.component = fa.component_index(".r0");
        std::vector<Index> slot_a;
        if (row.component) slot_a.push_back(*row.component);
        Index alpha = Index::spacetime(".r1");

        std::vector<ExprPtr> pieces;
        for (const auto& fb : m.fields) {
            const DeltaRule* rule = t.rule_for(fb.name);
            if (rule == nullptr || is_zero(rule->delta)) continue;
            std::optional<Index> comp_b = fb.component_index(".r2");
            std::vector<Index> slot_b;
            if (comp_b) slot_b.push_back(*comp_b);
            ExprPtr delta = rule->delta;
            if (comp_b && rule->component)
                delta = rename_symbolic_index(delta, rule->component->name, *comp_b);
            Index mu = Index::spacetime(".r3");
            ExprPtr ddelta = spacetime_derivative(delta, mu, m.space);

            ExprPtr dL_da = diff_field(m.lagrangian, make_field(fa.name, slot_a, {alpha}), m.space);
            ExprPtr dL_a = diff_field(m.lagrangian, make_field(fa.name, slot_a), m.space);

            ExprPtr m1 = diff_field(dL_da, make_field(fb.name, slot_b, {mu}), m.space);
            if (!is_zero(m1) && !is_zero(ddelta)) {
                ExprPtr inner = make_product(Rational(1), {m1, ddelta});
                pieces.push_back(
                    make_product(Rational(-1), {spacetime_derivative(inner, alpha, m.space)}));
            }
            ExprPtr m2 = diff_field(dL_da, make_field(fb.name, slot_b), m.space);
            if (!is_zero(m2)) {
                ExprPtr inner = make_product(Rational(1), {m2, delta});
                pieces.push_back(
                    make_product(Rational(-1), {spacetime_derivative(inner, alpha, m.space)}));
            }
            ExprPtr m3 = diff_field(dL_a, make_field(fb.name, slot_b, {mu}), m.space);
            if (!is_zero(m3) && !is_zero(ddelta))
                pieces.push_back(make_product(Rational(1), {m3, ddelta}));
            ExprPtr m4 = diff_field(dL_a, make_field(fb.name, slot_b), m.space);
            if (!is_zero(m4)) pieces.push_back(make_product(Rational(1), {m4, delta}));
        }
        row.expr = pieces.empty() ? zero() : canonicalize(make_sum(pieces), m.space);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace fieldsym
