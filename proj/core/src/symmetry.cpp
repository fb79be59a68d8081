#include "fieldsym/symmetry.hpp"

#include <algorithm>

#include "fieldsym/errors.hpp"

namespace fieldsym {

Index ThetaJet::theta_index_1() { return Index::spacetime(".q1"); }
Index ThetaJet::theta_index_2() { return Index::spacetime(".q2"); }

namespace {

// Rebuild a term with the theta factor removed and one of theta's derivative
// slots redirected to `target` (renaming the partner slot for symbolic
// indices, or tagging the direction with a delta for concrete ones).
ExprPtr coefficient_part(const Term& term, size_t theta_pos, const std::vector<ExprPtr>& extra) {
    std::vector<ExprPtr> factors;
    for (size_t i = 0; i < term.factors.size(); ++i)
        if (i != theta_pos) factors.push_back(term.factors[i]);
    factors.insert(factors.end(), extra.begin(), extra.end());
    return make_product(term.coeff, factors);
}

}  // namespace

ThetaJet extract_theta_jet(const ExprPtr& e, const Space& space) {
    ExprPtr canon = canonicalize(e, space);
    ThetaJet jet;
    std::vector<ExprPtr> c0, c1, c2;
    Index q1 = ThetaJet::theta_index_1();
    Index q2 = ThetaJet::theta_index_2();

    for (const auto& term : expr_terms(canon)) {
        int theta_count = 0;
        size_t theta_pos = 0;
        for (size_t i = 0; i < term.factors.size(); ++i) {
            if (term.factors[i]->tag == ExprTag::ArbFn) {
                ++theta_count;
                theta_pos = i;
            }
        }
        if (theta_count == 0)
            throw ValidationError("variation term carries no gauge function");
        if (theta_count > 1)
            throw ValidationError("variation is not linear in the gauge function");
        const Expr& theta = *term.factors[theta_pos];
        const auto& derivs = theta.derivs;
        if (derivs.size() > 2)
            throw ThetaOrderExceeded("variation carries derivatives of the gauge function beyond "
                                     "second order");
        if (derivs.empty()) {
            c0.push_back(coefficient_part(term, theta_pos, {}));
            continue;
        }
        // Map one theta derivative slot onto an output index.
        auto redirect = [&](const Index& slot, const Index& out,
                            const ExprPtr& piece) -> ExprPtr {
            if (slot.is_concrete())
                return make_product(Rational(1), {piece, make_delta(out, slot)});
            return rename_symbolic_index(piece, slot.name, out);
        };
        if (derivs.size() == 1) {
            c1.push_back(redirect(derivs[0], q1, coefficient_part(term, theta_pos, {})));
            continue;
        }
        // Second order: symmetrize over the two slot-to-output assignments.
        const Index &a = derivs[0], &b = derivs[1];
        bool self_paired = !a.is_concrete() && a == b;
        if (self_paired) {
            // Contracted pair within theta itself: coefficient picks kd(q1,q2).
            c2.push_back(coefficient_part(term, theta_pos, {make_delta(q1, q2)}));
            continue;
        }
        ExprPtr base = coefficient_part(term, theta_pos, {});
        ExprPtr first = redirect(b, q2, redirect(a, q1, base));
        ExprPtr second = redirect(b, q1, redirect(a, q2, base));
        c2.push_back(make_product(Rational(1, 2), {make_sum({first, second})}));
    }

    jet.c0 = c0.empty() ? zero() : canonicalize(make_sum(c0), space);
    jet.c1 = c1.empty() ? zero() : canonicalize(make_sum(c1), space);
    jet.c2 = c2.empty() ? zero() : canonicalize(make_sum(c2), space);
    return jet;
}

SymmetryVerdict verify_global(const ModelDef& m, const Transformation& t) {
    if (t.kind == TransformKind::Local)
        throw ValidationError("verify_global expects a global or spacetime transformation");
    SymmetryVerdict verdict;
    verdict.residual = first_variation(m, t);
    if (is_zero(verdict.residual)) {
        verdict.status = SymmetryStatus::Invariant;
        return verdict;
    }
    VariationResult vr = is_total_derivative(verdict.residual, m.space);
    if (vr.classification == VariationClass::TotalDerivative) {
        verdict.status = SymmetryStatus::InvariantUpToBoundary;
        verdict.current = vr.current;
    } else {
        verdict.status = SymmetryStatus::Broken;
    }
    return verdict;
}

SymmetryVerdict verify_local(const ModelDef& m, const Transformation& t) {
    if (t.kind != TransformKind::Local)
        throw ValidationError("verify_local expects a local transformation");
    SymmetryVerdict verdict;
    verdict.residual = first_variation(m, t);
    if (is_zero(verdict.residual)) {
        verdict.status = SymmetryStatus::Invariant;
        verdict.coefficients = ThetaJet{};
        return verdict;
    }
    verdict.coefficients = extract_theta_jet(verdict.residual, m.space);
    if (verdict.coefficients->all_zero()) {
        verdict.status = SymmetryStatus::Invariant;
        return verdict;
    }
    VariationResult vr = is_total_derivative(verdict.residual, m.space);
    if (vr.classification == VariationClass::TotalDerivative) {
        verdict.status = SymmetryStatus::InvariantUpToBoundary;
        verdict.current = vr.current;
    } else {
        verdict.status = SymmetryStatus::Broken;
    }
    return verdict;
}

SymmetryVerdict verify_symmetry(const ModelDef& m, const Transformation& t) {
    return t.kind == TransformKind::Local ? verify_local(m, t) : verify_global(m, t);
}

}  // namespace fieldsym
