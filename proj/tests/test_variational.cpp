#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fieldsym/deriv.hpp"
#include "fieldsym/errors.hpp"
#include "fieldsym/parser.hpp"
#include "fieldsym/printer.hpp"
#include "fieldsym/symmetry.hpp"
#include "fieldsym/variational.hpp"

using namespace fieldsym;

namespace {

std::string models_dir() { return FIELDSYM_MODELS_DIR; }

ModelDef make_scalar_model(const std::string& lagrangian, const std::string& params = "m0") {
    std::string text = "model scratch\nparam " + params + "\nfield phi scalar\nlagrangian = " +
                       lagrangian + "\n";
    return parse_model(text);
}

}  // namespace

TEST_CASE("Klein-Gordon equation of motion") {
    ModelDef m = make_scalar_model(
        "(1/2)*g(mu,nu)*d(phi,mu)*d(phi,nu) - (1/2)*m0^2*phi^2");
    ExprPtr el = euler_lagrange(m, "phi");
    ExprPtr expected = parse_expression("-g(mu,nu)*d(d(phi,mu),nu) - m0^2*phi", m);
    CHECK(canonically_equal(el, expected, m.space));
}

TEST_CASE("mexican hat equation of motion") {
    ModelDef m = load_model_file(models_dir() + "/mexican_hat.ftl");
    ExprPtr el = euler_lagrange(m, "phi", "a");
    ExprPtr expected = parse_expression(
        "-g(mu,nu)*d(d(phi[a],mu),nu) - lambda*(phi[i]*phi[i] - v^2)*phi[a]", m);
    CHECK(canonically_equal(el, expected, m.space));
}

TEST_CASE("total derivatives have vanishing Euler-Lagrange derivative") {
    ModelDef m = make_scalar_model("(1/2)*g(mu,nu)*d(phi,mu)*d(phi,nu)");
    // L = d_mu(phi d^mu phi)
    ExprPtr k = parse_expression("g(mu,nu)*phi*d(phi,nu)", m);
    ExprPtr div = spacetime_derivative(k, Index::spacetime("mu"), m.space);
    CHECK(is_zero(euler_lagrange_density(div, *m.find_field("phi"), std::nullopt, m.space)));
}

TEST_CASE("is_total_derivative classifies the three spec cases") {
    ModelDef m = make_scalar_model("phi^2");
    // d_mu(phi^2 d^mu phi)
    ExprPtr k1 = parse_expression("phi^2*g(mu,nu)*d(phi,nu)", m);
    ExprPtr e1 = spacetime_derivative(k1, Index::spacetime("mu"), m.space);
    VariationResult r1 = is_total_derivative(e1, m.space);
    CHECK(r1.classification == VariationClass::TotalDerivative);
    REQUIRE(r1.current.has_value());
    ExprPtr reproduced = spacetime_derivative(r1.current->expr, r1.current->index, m.space);
    CHECK(canonically_equal(reproduced, e1, m.space));

    // phi d^2 phi + d phi d phi = d_mu(phi d^mu phi)
    ExprPtr e2 = parse_expression(
        "phi*g(mu,nu)*d(d(phi,mu),nu) + g(mu,nu)*d(phi,mu)*d(phi,nu)", m);
    VariationResult r2 = is_total_derivative(e2, m.space);
    CHECK(r2.classification == VariationClass::TotalDerivative);
    REQUIRE(r2.current.has_value());
    CHECK(canonically_equal(spacetime_derivative(r2.current->expr, r2.current->index, m.space), e2,
                            m.space));

    // phi^2 is not a total derivative
    VariationResult r3 = is_total_derivative(parse_expression("phi^2", m), m.space);
    CHECK(r3.classification == VariationClass::NonzeroResidual);
}

TEST_CASE("Euler-Lagrange annihilates 50 random currents") {
    ModelDef m = parse_model(
        "model scratch\nparam c1 c2\nfield phi scalar\nfield chi scalar\n"
        "lagrangian = phi^2\n");
    std::mt19937 rng(20240820);
    for (int trial = 0; trial < 50; ++trial) {
        // Random K^mu: polynomial in fields times one first derivative, or an
        // explicit coordinate direction.
        std::vector<ExprPtr> pieces;
        int nterms = 1 + static_cast<int>(rng() % 3);
        for (int t = 0; t < nterms; ++t) {
            int pphi = static_cast<int>(rng() % 3);
            int pchi = static_cast<int>(rng() % 3);
            std::vector<ExprPtr> factors;
            factors.push_back(make_param(rng() % 2 ? "c1" : "c2"));
            if (pphi) factors.push_back(make_power(make_field("phi"), pphi));
            if (pchi) factors.push_back(make_power(make_field("chi"), pchi));
            switch (rng() % 3) {
                case 0:
                    factors.push_back(make_field("phi", {}, {Index::spacetime("mu")}));
                    break;
                case 1:
                    factors.push_back(make_product(
                        Rational(1), {make_metric(Index::spacetime("mu"), Index::spacetime("nu")),
                                      make_field("chi", {}, {Index::spacetime("nu")})}));
                    break;
                default:
                    factors.push_back(make_coord(Index::spacetime("mu")));
                    break;
            }
            pieces.push_back(make_product(Rational(1 + static_cast<int>(rng() % 4), 2), factors));
        }
        ExprPtr k = make_sum(pieces);
        ExprPtr div = spacetime_derivative(k, Index::spacetime("mu"), m.space);
        CAPTURE(trial);
        CHECK(is_zero(euler_lagrange_density(div, *m.find_field("phi"), std::nullopt, m.space)));
        CHECK(is_zero(euler_lagrange_density(div, *m.find_field("chi"), std::nullopt, m.space)));
    }
}

TEST_CASE("first variation of the mexican hat under its U(1) is identically zero") {
    ModelDef m = load_model_file(models_dir() + "/mexican_hat.ftl");
    ExprPtr dl = first_variation(m, *m.find_transform("u1"));
    CHECK(is_zero(dl));
}

TEST_CASE("shift symmetry of the free scalar; mass term breaks it") {
    ModelDef free_model = parse_model(
        "model free\nfield phi scalar\nlagrangian = (1/2)*g(mu,nu)*d(phi,mu)*d(phi,nu)\n"
        "transform shift global { delta phi = eps0 }\n");
    ExprPtr dl = first_variation(*&free_model, *free_model.find_transform("shift"));
    CHECK(is_zero(dl));

    ModelDef massive = parse_model(
        "model massive\nparam m0\nfield phi scalar\n"
        "lagrangian = (1/2)*g(mu,nu)*d(phi,mu)*d(phi,nu) - (1/2)*m0^2*phi^2\n"
        "transform shift global { delta phi = eps0 }\n");
    ExprPtr dl2 = first_variation(massive, *massive.find_transform("shift"));
    ExprPtr expected = parse_expression("-m0^2*eps0*phi", massive);
    CHECK(canonically_equal(dl2, expected, massive.space));
}

TEST_CASE("first variation is linear in the direction") {
    ModelDef m = load_model_file(models_dir() + "/mexican_hat.ftl");
    Transformation t1 = *m.find_transform("u1");
    Transformation t2 = t1;
    t2.deltas[0].delta = parse_expression("phi[q]", m);
    t2.deltas[0].delta =
        rename_symbolic_index(t2.deltas[0].delta, "q", *t2.deltas[0].component);
    Transformation sum = t1;
    sum.deltas[0].delta =
        canonicalize(make_sum({t1.deltas[0].delta, t2.deltas[0].delta}), m.space);
    ExprPtr lhs = first_variation(m, sum);
    ExprPtr rhs = canonicalize(
        make_sum({first_variation(m, t1), first_variation(m, t2)}), m.space);
    CHECK(canonically_equal(lhs, rhs, m.space));
}

TEST_CASE("second variation of the free scalar under a constant shift vanishes") {
    ModelDef m = parse_model(
        "model free\nfield phi scalar\nlagrangian = (1/2)*g(mu,nu)*d(phi,mu)*d(phi,nu)\n"
        "transform shift global { delta phi = eps0 }\n");
    auto rows = second_variation_apply(m, *m.find_transform("shift"));
    REQUIRE(rows.size() == 1);
    CHECK(is_zero(rows[0].expr));
}

TEST_CASE("second variation of the mexican hat reduces to Hessian times direction") {
    ModelDef m = load_model_file(models_dir() + "/mexican_hat.ftl");
    auto rows = second_variation_apply(m, *m.find_transform("u1"));
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].component.has_value());
    // At constant fields, the operator reduces to d2V/dphi_a dphi_b * Delta_b
    // with V the quartic potential.
    ExprPtr at_constant = drop_field_derivatives(rows[0].expr, m.space);
    ExprPtr reduced = rename_symbolic_index(at_constant, rows[0].component->name,
                                            Index::internal("a", 2));
    // Hand-built Hessian contraction: V = (lambda/4)(phi.phi - v^2)^2.
    // d2V/da db = lambda[(phi.phi - v^2) kd(a,b) + 2 phi_a phi_b];
    // contracted with eps0 * eps(b,k) phi_k the second piece drops.
    ExprPtr expected = parse_expression(
        "-lambda*(phi[i]*phi[i] - v^2)*eps0*eps(a,k)*phi[k]", m);
    expected = rename_symbolic_index(expected, "a", Index::internal("a", 2));
    CHECK(canonically_equal(reduced, expected, m.space));
}

TEST_CASE("verify_global: mexican hat invariant, massive shift broken") {
    ModelDef m = load_model_file(models_dir() + "/mexican_hat.ftl");
    SymmetryVerdict v = verify_global(m, *m.find_transform("u1"));
    CHECK(v.status == SymmetryStatus::Invariant);
    CHECK(is_zero(v.residual));

    ModelDef massive = parse_model(
        "model massive\nparam m0\nfield phi scalar\n"
        "lagrangian = (1/2)*g(mu,nu)*d(phi,mu)*d(phi,nu) - (1/2)*m0^2*phi^2\n"
        "transform shift global { delta phi = eps0 }\n");
    SymmetryVerdict b = verify_global(massive, *massive.find_transform("shift"));
    CHECK(b.status == SymmetryStatus::Broken);
    CHECK(canonically_equal(b.residual, parse_expression("-m0^2*eps0*phi", massive),
                            massive.space));
}

TEST_CASE("dilation invariance of the coleman model is a boundary statement") {
    ModelDef m = load_model_file(models_dir() + "/coleman.ftl");
    SymmetryVerdict v = verify_global(m, *m.find_transform("dilation"));
    CHECK(v.status == SymmetryStatus::InvariantUpToBoundary);
    // delta L = d_mu(x^mu L) exactly.
    ExprPtr xk = make_product(Rational(1), {make_coord(Index::spacetime("mu")), m.lagrangian});
    ExprPtr divergence = spacetime_derivative(xk, Index::spacetime("mu"), m.space);
    CHECK(canonically_equal(v.residual, divergence, m.space));
    // The exhibited current reproduces the residual.
    REQUIRE(v.current.has_value());
    CHECK(canonically_equal(spacetime_derivative(v.current->expr, v.current->index, m.space),
                            v.residual, m.space));
}

TEST_CASE("conformal family members are boundary-invariances of the coleman model") {
    ModelDef m = load_model_file(models_dir() + "/coleman.ftl");
    for (const char* name : {"conformal_0", "conformal_2"}) {
        SymmetryVerdict v = verify_global(m, *m.find_transform(name));
        CAPTURE(name);
        CHECK(v.status == SymmetryStatus::InvariantUpToBoundary);
    }
}

TEST_CASE("verify_local: the gauge model is exactly invariant") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    SymmetryVerdict v = verify_local(m, *m.find_transform("u1"));
    CHECK(v.status == SymmetryStatus::Invariant);
    CHECK(is_zero(v.residual));
    REQUIRE(v.coefficients.has_value());
    CHECK(v.coefficients->all_zero());
}

TEST_CASE("verify_local: dropping the coupling breaks the symmetry in d-theta") {
    ModelDef m = parse_model(
        "model u1_nocoupling\nparam lambda v\nfield A vector\nfield phi[2] scalar\n"
        "lagrangian = -(1/4)*(d(A[nu],mu) - d(A[mu],nu))*(d(A[be],al) - d(A[al],be))*g(mu,al)*g(nu,be)"
        " + g(mu,nu)*d(phi[i],mu)*d(phi[i],nu) - (lambda/4)*(phi[i]*phi[i] - v^2)^2\n"
        "transform u1 local {\n  delta A[mu] = d(theta,mu)\n"
        "  delta phi[i] = eps(i,j)*phi[j]*theta\n}\n");
    SymmetryVerdict v = verify_local(m, *m.find_transform("u1"));
    CHECK(v.status == SymmetryStatus::Broken);
    REQUIRE(v.coefficients.has_value());
    // The d-theta coefficient is 2 eps_{jk} phi_k d^b phi_j.
    ExprPtr expected = parse_expression("2*g(be,nu)*eps(j,k)*phi[k]*d(phi[j],nu)", m);
    expected = rename_symbolic_index(expected, "be", ThetaJet::theta_index_1());
    CHECK(canonically_equal(v.coefficients->c1, expected, m.space));
    CHECK(is_zero(v.coefficients->c2));
}

TEST_CASE("pure gauge sector alone is locally invariant") {
    ModelDef m = parse_model(
        "model pure_gauge\nfield A vector\nfield phi[2] scalar\n"
        "lagrangian = -(1/4)*(d(A[nu],mu) - d(A[mu],nu))*(d(A[be],al) - d(A[al],be))*g(mu,al)*g(nu,be)\n"
        "transform u1 local {\n  delta A[mu] = d(theta,mu)\n"
        "  delta phi[i] = eps(i,j)*phi[j]*theta\n}\n");
    SymmetryVerdict v = verify_local(m, *m.find_transform("u1"));
    // The dd-theta coefficient vanishes by antisymmetry; the phi deltas feed
    // nothing because L is phi-independent.
    CHECK(v.status == SymmetryStatus::Invariant);
}

TEST_CASE("theta-jet reconstruction matches the variation up to a boundary") {
    // A deliberately non-invariant model exercises every jet order.
    ModelDef m = parse_model(
        "model probe\nparam c\nfield A vector\nfield phi[2] scalar\n"
        "lagrangian = c*g(mu,nu)*A[mu]*A[nu]*phi[i]*phi[i] + g(mu,nu)*d(phi[i],mu)*d(phi[i],nu)\n"
        "transform u1 local {\n  delta A[mu] = d(theta,mu)\n"
        "  delta phi[i] = eps(i,j)*phi[j]*theta\n}\n");
    SymmetryVerdict v = verify_local(m, *m.find_transform("u1"));
    REQUIRE(v.coefficients.has_value());
    const ThetaJet& jet = *v.coefficients;
    Index q1 = ThetaJet::theta_index_1();
    Index q2 = ThetaJet::theta_index_2();
    ExprPtr rebuilt = canonicalize(
        make_sum({make_product(Rational(1), {jet.c0, make_arbfn("theta")}),
                  make_product(Rational(1), {jet.c1, make_arbfn("theta", {q1})}),
                  make_product(Rational(1), {jet.c2, make_arbfn("theta", {q1, q2})})}),
        m.space);
    ExprPtr difference =
        canonicalize(make_sum({v.residual, make_product(Rational(-1), {rebuilt})}), m.space);
    VariationResult vr = is_total_derivative(difference, m.space);
    CHECK(vr.classification != VariationClass::NonzeroResidual);
}

TEST_CASE("verify_local with constant theta degenerates to the global verdict") {
    // Global rotation of the ungauged doublet: invariant. The local check on
    // the same model must report all non-constant-jet coefficients in a way
    // consistent with the global verdict: c0 == the global variation / eps0.
    ModelDef m = load_model_file(models_dir() + "/mexican_hat.ftl");
    ModelDef local_version = m;
    Transformation t;
    t.name = "u1_local";
    t.kind = TransformKind::Local;
    DeltaRule rule;
    rule.field = "phi";
    rule.component = m.fields[0].component_index("i");
    rule.delta = parse_expression("eps(i,j)*phi[j]*theta", m);
    t.deltas.push_back(rule);
    local_version.transforms.push_back(t);
    validate_model(local_version);
    SymmetryVerdict v = verify_local(local_version, t);
    REQUIRE(v.coefficients.has_value());
    // c0 must vanish: that is exactly global invariance.
    CHECK(is_zero(v.coefficients->c0));
    CHECK(is_zero(v.coefficients->c2));
    SymmetryVerdict g = verify_global(m, *m.find_transform("u1"));
    CHECK(g.status == SymmetryStatus::Invariant);
}

TEST_CASE("numeric spot-check: invariant variations evaluate to zero") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    ExprPtr dl = first_variation(m, *m.find_transform("u1"));
    CHECK(is_zero(dl));  // exact zero; numeric check is vacuous but cheap
    ModelDef mh = load_model_file(models_dir() + "/mexican_hat.ftl");
    ExprPtr dl2 = first_variation(mh, *mh.find_transform("u1"));
    CHECK(is_zero(dl2));
}
