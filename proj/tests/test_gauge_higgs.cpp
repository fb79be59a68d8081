#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fieldsym/errors.hpp"
#include "fieldsym/eval.hpp"
#include "fieldsym/gauge_higgs.hpp"
#include "fieldsym/lattice.hpp"
#include "fieldsym/parser.hpp"

using namespace fieldsym;

namespace {

std::string models_dir() { return FIELDSYM_MODELS_DIR; }
std::string fixtures_dir() { return FIELDSYM_FIXTURES_DIR; }

VacuumConfig higgs_vacuum(Rational phi1, Rational phi2) {
    VacuumConfig vac;
    vac.set("phi", {1}, phi1);
    vac.set("phi", {2}, phi2);
    for (int mu = 0; mu < 4; ++mu) vac.set("A", {mu}, Rational(0));
    vac.params = {{"lambda", Rational(1, 2)}, {"v", Rational(1)}};
    return vac;
}

}  // namespace

TEST_CASE("shape detection finds the gauge structure and unit charge") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    GaugeShape shape = detect_gauge_shape(m);
    CHECK(shape.gauge_field == "A");
    CHECK(shape.scalar_field == "phi");
    CHECK(shape.transform == "u1");
    REQUIRE(shape.charge->tag == ExprTag::Number);
    CHECK(shape.charge->number == Rational(1));
    CHECK(shape.kinetic_strength == Rational(1));
}

TEST_CASE("shape mismatch without a vector field") {
    ModelDef m = load_model_file(models_dir() + "/mexican_hat.ftl");
    CHECK_THROWS_AS(detect_gauge_shape(m), ShapeMismatch);
}

TEST_CASE("all constraints vanish for the standard coupling") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    GaugeConstraints cs = derive_constraints(m);
    for (const auto& c : cs.off_shell) {
        CAPTURE(c.label);
        CHECK(c.satisfied);
    }
    for (const auto& c : cs.constant) {
        CAPTURE(c.label);
        CHECK(c.satisfied);
    }
}

TEST_CASE("halved coupling fails fin3a with the epsilon-phi residual") {
    ModelDef m = load_model_file(fixtures_dir() + "/u1_higgs_weak.ftl");
    GaugeConstraints cs = derive_constraints(m);
    const LabeledConstraint* fin3a = cs.find("fin3a");
    REQUIRE(fin3a != nullptr);
    CHECK_FALSE(fin3a->satisfied);
    // Residual proportional to g(q1,q2) eps(i,k) phi[k]: the difference of the
    // halved cross term against the kinetic-term inhomogeneity.
    ExprPtr pattern = make_product(
        Rational(1), {make_metric(ThetaJet::theta_index_1(), ThetaJet::theta_index_2()),
                      make_epsilon(scalar_row_index(), Index::internal("k", 2)),
                      make_field("phi", {Index::internal("k", 2)})});
    auto coeffs = match_linear_combination(fin3a->expr, {pattern}, m.space);
    REQUIRE(coeffs.has_value());
    CHECK_FALSE((*coeffs)[0].is_zero());
    CHECK((*coeffs)[0] == Rational(1));
}

TEST_CASE("without any coupling fin3a keeps only the inhomogeneous term") {
    ModelDef m = parse_model(
        "model u1_nocoupling\nparam lambda v\nfield A vector\nfield phi[2] scalar\n"
        "lagrangian = -(1/4)*(d(A[nu],mu) - d(A[mu],nu))*(d(A[be],al) - d(A[al],be))*g(mu,al)*g(nu,be)"
        " + g(mu,nu)*d(phi[i],mu)*d(phi[i],nu) - (lambda/4)*(phi[i]*phi[i] - v^2)^2\n"
        "transform u1 local {\n  delta A[mu] = d(theta,mu)\n"
        "  delta phi[i] = eps(i,j)*phi[j]*theta\n}\n");
    GaugeConstraints cs = derive_constraints(m);
    const LabeledConstraint* fin3a = cs.find("fin3a");
    REQUIRE(fin3a != nullptr);
    CHECK_FALSE(fin3a->satisfied);
    ExprPtr pattern = make_product(
        Rational(1), {make_metric(ThetaJet::theta_index_1(), ThetaJet::theta_index_2()),
                      make_epsilon(scalar_row_index(), Index::internal("k", 2)),
                      make_field("phi", {Index::internal("k", 2)})});
    auto coeffs = match_linear_combination(fin3a->expr, {pattern}, m.space);
    REQUIRE(coeffs.has_value());
    CHECK((*coeffs)[0] == Rational(2));
}

TEST_CASE("constant-scalar constraints are the derivative-free reductions") {
    ModelDef m = load_model_file(fixtures_dir() + "/u1_higgs_weak.ftl");
    GaugeConstraints cs = derive_constraints(m);
    for (const char* label : {"fin1", "fin2", "fin3", "fin4", "fin5"}) {
        const LabeledConstraint* full = cs.find(label);
        const LabeledConstraint* reduced = cs.find(std::string(label) + "a");
        REQUIRE(full != nullptr);
        REQUIRE(reduced != nullptr);
        ExprPtr dropped = drop_field_derivatives(full->expr, m.space, {"phi"});
        CAPTURE(label);
        CHECK(canonically_equal(dropped, reduced->expr, m.space));
    }
}

TEST_CASE("gauge mass tensor is twice the metric times phi.phi") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    GaugeMassReport r = gauge_mass(m, higgs_vacuum(Rational(1), Rational(0)));
    // Direct tensor == 2 g(a,b) phi.phi canonically.
    ExprPtr expected = make_product(
        Rational(2), {make_metric(gauge_row_index(), Index::spacetime(".g9")),
                      make_field("phi", {Index::internal("i", 2)}),
                      make_field("phi", {Index::internal("i", 2)})});
    CHECK(canonically_equal(r.mass_tensor, expected, m.space));
    CHECK(r.routes_agree);
    CHECK(r.proportional_to_metric);
    CHECK(r.proca_sign_ok);
    CHECK(r.mass_squared == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r.mass == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("gauge mass values across vacua") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    GaugeMassReport zero_phase = gauge_mass(m, higgs_vacuum(Rational(0), Rational(0)));
    CHECK(zero_phase.mass_squared == doctest::Approx(0.0));
    CHECK(zero_phase.mass == doctest::Approx(0.0));

    GaugeMassReport broken = gauge_mass(m, higgs_vacuum(Rational(3), Rational(4)));
    CHECK(broken.mass_squared == doctest::Approx(50.0).epsilon(1e-14));
    CHECK(broken.mass == doctest::Approx(std::sqrt(50.0)).epsilon(1e-14));
}

TEST_CASE("gauge mass agrees with a numeric second difference of the density") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    GaugeMassReport r = gauge_mass(m, higgs_vacuum(Rational(3), Rational(4)));

    NumericEnv env;
    env.space = m.space;
    env.params = {{"lambda", 0.5}, {"v", 1.0}};
    env.set_field("phi", {1}, {}, 3.0);
    env.set_field("phi", {2}, {}, 4.0);
    for (int mu = 0; mu < 4; ++mu) {
        env.set_field("A", {mu}, {}, 0.0);
        for (int nu = 0; nu < 4; ++nu) env.set_field("A", {mu}, {nu}, 0.0);
        env.set_field("phi", {1}, {mu}, 0.0);
        env.set_field("phi", {2}, {mu}, 0.0);
    }
    // d2L/dA_0 dA_0 by central second difference must equal M^2 g^{00} = M^2.
    const double h = 1e-4;
    auto density_at = [&](double a0) {
        NumericEnv e2 = env;
        e2.set_field("A", {0}, {}, a0);
        return eval_numeric(m.lagrangian, e2);
    };
    double second = (density_at(h) - 2.0 * density_at(0.0) + density_at(-h)) / (h * h);
    CHECK(std::abs(second - r.mass_squared * 1.0) < 1e-6 * std::max(1.0, r.mass_squared));
}

TEST_CASE("gauge mass agrees with the lattice second difference") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    GaugeMassReport r = gauge_mass(m, higgs_vacuum(Rational(3), Rational(4)));
    LatticeAction lattice(m, {16, 1.0}, {{"lambda", 0.5}, {"v", 1.0}});
    VacuumConfig vac = higgs_vacuum(Rational(3), Rational(4));
    std::vector<double> hess = lattice.hessian(lattice.constant_config(vac));
    std::vector<double> block = lattice.constant_mode_block(hess);
    // Component order on the 1D lattice: A[0], phi[1], phi[2]. The retained
    // metric entry is +1, so the A-block diagonal is the mass-squared.
    REQUIRE(lattice.component_names()[0] == "A[0]");
    double second_difference = block[0];
    CHECK(std::abs(second_difference - r.mass_squared) <
          1e-6 * std::max(1.0, r.mass_squared));
}

TEST_CASE("mass tensor not proportional to the metric is rejected") {
    ModelDef m = parse_model(
        "model odd\nparam lambda v\nfield A vector\nfield phi[2] scalar\n"
        "lagrangian = -(1/4)*(d(A[nu],mu) - d(A[mu],nu))*(d(A[be],al) - d(A[al],be))*g(mu,al)*g(nu,be)"
        " + g(mu,nu)*d(phi[i],mu)*d(phi[i],nu) - (lambda/4)*(phi[i]*phi[i] - v^2)^2\n"
        " + 2*g(mu,nu)*A[mu]*eps(i,j)*phi[i]*d(phi[j],nu)"
        " + phi[i]*phi[i]*A[0]*A[0]\n"
        "transform u1 local {\n  delta A[mu] = d(theta,mu)\n"
        "  delta phi[i] = eps(i,j)*phi[j]*theta\n}\n");
    VacuumConfig vac;
    vac.set("phi", {1}, Rational(1));
    vac.params = {{"lambda", Rational(1, 2)}, {"v", Rational(1)}};
    CHECK_THROWS_AS(gauge_mass(m, vac), NotProportional);
}

TEST_CASE("contracted identities hold for the standard model") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    ConstraintSet ids = residual_identities(m);
    REQUIRE(ids.size() == 2);
    for (const auto& c : ids) {
        CAPTURE(c.label);
        CAPTURE(c.note);
        CHECK(c.satisfied);
    }
}

TEST_CASE("an asymmetric potential breaks the contracted second identity") {
    ModelDef m = parse_model(
        "model asym\nparam lambda v c\nfield A vector\nfield phi[2] scalar\n"
        "lagrangian = -(1/4)*(d(A[nu],mu) - d(A[mu],nu))*(d(A[be],al) - d(A[al],be))*g(mu,al)*g(nu,be)"
        " + g(mu,nu)*d(phi[i],mu)*d(phi[i],nu) - (lambda/4)*(phi[i]*phi[i] - v^2)^2"
        " - c*phi[1]^3"
        " + 2*g(mu,nu)*A[mu]*eps(i,j)*phi[i]*d(phi[j],nu)"
        " + phi[i]*phi[i]*g(mu,nu)*A[mu]*A[nu]\n"
        "transform u1 local {\n  delta A[mu] = d(theta,mu)\n"
        "  delta phi[i] = eps(i,j)*phi[j]*theta\n}\n");
    ConstraintSet ids = residual_identities(m);
    REQUIRE(ids.size() == 2);
    CHECK_FALSE(ids[1].satisfied);
    // The residual carries the asymmetry parameter.
    bool mentions_c = false;
    for_each_atom(ids[1].expr, [&](const Expr& a) {
        if (a.tag == ExprTag::Param && a.name == "c") mentions_c = true;
    });
    CHECK(mentions_c);

    // At the trivial configuration everything evaluates to zero.
    VacuumConfig origin;
    origin.set("phi", {1}, Rational(0));
    origin.set("phi", {2}, Rational(0));
    ConstraintSet at_zero = residual_identities(m, origin);
    for (const auto& c : at_zero) {
        CAPTURE(c.label);
        CHECK(c.satisfied);
    }
}

TEST_CASE("polar rewrite eliminates the angular mode from the gauged model") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    PolarReport r = eliminate_would_be_goldstone(m);
    CHECK(r.has_gauge_field);
    CHECK(r.angular_field_absent);
    CHECK(r.angular_gradient_absent);
    CHECK(r.shift_orientation != 0);
    REQUIRE(r.polar_jet.has_value());
    CHECK(r.polar_jet->all_zero());
    // The rewritten density carries the radial kinetic term and the
    // rho^2 B^2 mass structure: d2L/dB dB = 2 rho^2 g.
    ExprPtr expected_mass = make_product(
        Rational(2), {make_power(make_field("rho"), 2),
                      make_metric(Index::spacetime(".b1"), Index::spacetime(".b2"))});
    CHECK(canonically_equal(r.radial_gauge_mass_tensor, expected_mass, m.space));
    // No angular atoms survive anywhere.
    bool has_xi = false;
    for_each_atom(r.rewritten, [&](const Expr& a) {
        if ((a.tag == ExprTag::Field || a.tag == ExprTag::Trig) && a.name == "xi") has_xi = true;
    });
    CHECK_FALSE(has_xi);
}

TEST_CASE("ungauged model keeps a gradient-coupled angular mode") {
    ModelDef m = load_model_file(fixtures_dir() + "/u1_global.ftl");
    PolarReport r = eliminate_would_be_goldstone(m);
    CHECK_FALSE(r.has_gauge_field);
    CHECK(r.angular_field_absent);       // dL/dxi == 0
    CHECK_FALSE(r.angular_gradient_absent);  // dL/d(d xi) = 2 rho^2 d xi != 0
    ExprPtr expected = make_product(
        Rational(2), {make_power(make_field("rho"), 2),
                      make_metric(Index::spacetime(".z0"), Index::spacetime("nu")),
                      make_field("xi", {}, {Index::spacetime("nu")})});
    CHECK(canonically_equal(r.dL_ddxi, expected, m.space));
}

TEST_CASE("free complex scalar reduces to radial and angular kinetic terms") {
    ModelDef m = load_model_file(fixtures_dir() + "/free_complex.ftl");
    PolarReport r = eliminate_would_be_goldstone(m);
    CHECK(r.angular_field_absent);
    CHECK_FALSE(r.angular_gradient_absent);
    ExprPtr expected = parse_expression(
        "g(mu,nu)*d(phi[i],mu)*d(phi[i],nu)", m);
    // rewritten = d rho d rho + rho^2 d xi d xi
    ExprPtr target = make_sum(
        {make_product(Rational(1),
                      {make_metric(Index::spacetime("mu"), Index::spacetime("nu")),
                       make_field("rho", {}, {Index::spacetime("mu")}),
                       make_field("rho", {}, {Index::spacetime("nu")})}),
         make_product(Rational(1),
                      {make_power(make_field("rho"), 2),
                       make_metric(Index::spacetime("mu"), Index::spacetime("nu")),
                       make_field("xi", {}, {Index::spacetime("mu")}),
                       make_field("xi", {}, {Index::spacetime("nu")})})});
    CHECK(canonically_equal(r.rewritten, target, m.space));
    (void)expected;
}

TEST_CASE("polar rewrite preserves numerics at 20 random configurations") {
    ModelDef m = load_model_file(models_dir() + "/u1_higgs.ftl");
    PolarReport r = eliminate_would_be_goldstone(m);
    REQUIRE(r.shift_orientation != 0);
    std::mt19937 rng(20240821);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        // Draw polar jets and map them to the original variables.
        double rho = 0.5 + std::abs(dist(rng));
        double xi = dist(rng);
        std::vector<double> drho(4), dxi(4), b(4);
        std::vector<std::vector<double>> db(4, std::vector<double>(4));
        for (int mu = 0; mu < 4; ++mu) {
            drho[mu] = dist(rng);
            dxi[mu] = dist(rng);
            b[mu] = dist(rng);
            for (int nu = 0; nu < 4; ++nu) db[mu][nu] = dist(rng);
        }
        // Symmetrize nothing: A_mu = B_mu - s d_mu xi, and d_nu A_mu picks up
        // the second xi derivative, which we set to zero for simplicity by
        // treating dxi as constant; instead absorb it into db.
        const double s = r.shift_orientation;
        NumericEnv orig;
        orig.space = m.space;
        orig.params = {{"lambda", 0.7}, {"v", 1.3}};
        NumericEnv polar = orig;
        double phi1 = rho * std::cos(xi), phi2 = rho * std::sin(xi);
        orig.set_field("phi", {1}, {}, phi1);
        orig.set_field("phi", {2}, {}, phi2);
        for (int mu = 0; mu < 4; ++mu) {
            double dphi1 = std::cos(xi) * drho[mu] - rho * std::sin(xi) * dxi[mu];
            double dphi2 = std::sin(xi) * drho[mu] + rho * std::cos(xi) * dxi[mu];
            orig.set_field("phi", {1}, {mu}, dphi1);
            orig.set_field("phi", {2}, {mu}, dphi2);
            orig.set_field("A", {mu}, {}, b[mu] - s * dxi[mu]);
            for (int nu = 0; nu <= mu; ++nu) {
                // d_nu A_mu = d_nu B_mu - s * d_nu d_mu xi with the second
                // derivative of xi chosen zero.
                orig.set_field("A", {mu}, {nu}, db[mu][nu]);
                if (nu != mu) orig.set_field("A", {nu}, {mu}, db[nu][mu]);
            }
            polar.set_field("rho", {}, {mu}, drho[mu]);
            polar.set_field("xi", {}, {mu}, dxi[mu]);
            polar.set_field("B", {mu}, {}, b[mu]);
            for (int nu = 0; nu <= mu; ++nu) {
                polar.set_field("B", {mu}, {nu}, db[mu][nu]);
                if (nu != mu) polar.set_field("B", {nu}, {mu}, db[nu][mu]);
            }
        }
        polar.set_field("rho", {}, {}, rho);
        polar.set_field("xi", {}, {}, xi);
        double before = eval_numeric(m.lagrangian, orig);
        double after = eval_numeric(r.rewritten, polar);
        CAPTURE(trial);
        CHECK(std::abs(before - after) < 1e-9 * std::max(1.0, std::abs(before)));
    }
}
