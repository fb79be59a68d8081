#include "fieldsym/goldstone.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fieldsym/deriv.hpp"
#include "fieldsym/errors.hpp"

namespace fieldsym {

namespace {

std::string label_of(const FieldDecl& f, const std::vector<int>& tuple) {
    if (tuple.empty()) return f.name;
    return f.name + "[" + std::to_string(tuple[0]) + "]";
}

// Exact numeric value of a fully-bound expression.
Rational exact_value(const ExprPtr& e, const Space& space, const char* what) {
    ExprPtr canon = canonicalize(e, space);
    if (is_zero(canon)) return Rational(0);
    if (canon->tag != ExprTag::Number)
        throw MissingAtom(std::string(what) +
                          " did not reduce to a number: " + debug_string(canon));
    return canon->number;
}

std::vector<Binding> numeric_bindings(const ModelDef& m, const VacuumConfig& v) {
    std::vector<Binding> bindings = vacuum_bindings(m, v, /*bind_params=*/true);
    bindings.push_back({make_param("eps0"), one()});
    return bindings;
}

}  // namespace

std::vector<std::string> component_labels(const ModelDef& m) {
    std::vector<std::string> labels;
    for (const auto& f : m.fields)
        for (const auto& tuple : f.component_tuples(m.space)) labels.push_back(label_of(f, tuple));
    return labels;
}

ExprPtr extract_potential(const ModelDef& m) {
    for (const auto& f : m.fields)
        if (f.kind == FieldKind::Vector)
            throw NoPotential("model declares the vector field '" + f.name +
                              "'; use the gauge analysis instead");
    std::vector<ExprPtr> potential_terms;
    for (const auto& term : expr_terms(m.lagrangian)) {
        bool has_deriv = false;
        for (const auto& factor : term.factors) {
            for_each_atom(factor, [&](const Expr& a) {
                if (a.tag == ExprTag::Field && !a.derivs.empty()) has_deriv = true;
            });
        }
        if (!has_deriv)
            potential_terms.push_back(make_product(Rational(-1) * term.coeff, term.factors));
    }
    if (potential_terms.empty()) return zero();
    return canonicalize(make_sum(std::move(potential_terms)), m.space);
}

ExprPtr potential_gradient_entry(const ModelDef& m, const std::string& field,
                                 const std::vector<int>& components) {
    const FieldDecl* decl = m.find_field(field);
    if (decl == nullptr) throw UnknownField("unknown field '" + field + "'");
    ExprPtr potential = expand_internal_indices(extract_potential(m), m.space);
    return diff_field(potential, decl->atom(components), m.space);
}

ExtremumReport check_extremum(const ModelDef& m, const VacuumConfig& v, double tol) {
    ExtremumReport report;
    report.tolerance = tol;
    report.labels = component_labels(m);
    ExprPtr potential = expand_internal_indices(extract_potential(m), m.space);
    auto bindings = numeric_bindings(m, v);
    for (const auto& f : m.fields) {
        for (const auto& tuple : f.component_tuples(m.space)) {
            ExprPtr grad = diff_field(potential, f.atom(tuple), m.space);
            Rational value =
                exact_value(substitute(grad, bindings, m.space), m.space, "potential gradient");
            report.gradient.push_back(value.to_double());
        }
    }
    for (double g : report.gradient) report.max_abs = std::max(report.max_abs, std::abs(g));
    report.extremum = report.max_abs < tol;
    return report;
}

MassReport mass_matrix(const ModelDef& m, const VacuumConfig& v) {
    MassReport report;
    report.labels = component_labels(m);
    const int n = m.component_count();
    ExprPtr potential = expand_internal_indices(extract_potential(m), m.space);
    auto bindings = numeric_bindings(m, v);

    std::vector<ExprPtr> atoms;
    for (const auto& f : m.fields)
        for (const auto& tuple : f.component_tuples(m.space)) atoms.push_back(f.atom(tuple));

    std::vector<ExprPtr> first(n);
    for (int a = 0; a < n; ++a) first[a] = diff_field(potential, atoms[a], m.space);

    report.matrix.assign(static_cast<size_t>(n) * n, 0.0);
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            ExprPtr second = diff_field(first[a], atoms[b], m.space);
            Rational value =
                exact_value(substitute(second, bindings, m.space), m.space, "potential Hessian");
            report.matrix[a * n + b] = value.to_double();
            report.matrix[b * n + a] = value.to_double();
        }
    }

    Eigen::MatrixXd h(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) h(a, b) = report.matrix[a * n + b];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    report.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    std::sort(report.eigenvalues.begin(), report.eigenvalues.end());

    double max_abs = 0.0;
    for (double ev : report.eigenvalues) max_abs = std::max(max_abs, std::abs(ev));
    report.zero_tolerance = 1e-9 * std::max(1.0, max_abs);
    report.zero_count = 0;
    for (double ev : report.eigenvalues)
        if (std::abs(ev) < report.zero_tolerance) ++report.zero_count;
    return report;
}

std::vector<double> direction_at_vacuum(const ModelDef& m, const Transformation& t,
                                        const VacuumConfig& v) {
    std::vector<double> direction;
    auto bindings = numeric_bindings(m, v);
    for (const auto& f : m.fields) {
        const DeltaRule* rule = t.rule_for(f.name);
        for (const auto& tuple : f.component_tuples(m.space)) {
            if (rule == nullptr) {
                direction.push_back(0.0);
                continue;
            }
            ExprPtr delta = rule->delta;
            if (rule->component && !tuple.empty()) {
                Index conc =
                    f.kind == FieldKind::Vector
                        ? Index::spacetime_c(tuple[0])
                        : Index::internal_c(tuple[0],
                                            static_cast<std::uint16_t>(f.multiplet_size));
                delta = rename_symbolic_index(delta, rule->component->name, conc);
            }
            // Constant part only: derivatives vanish at a constant
            // configuration and explicit-coordinate terms are dropped.
            delta = drop_field_derivatives(expand_internal_indices(delta, m.space), m.space);
            std::vector<ExprPtr> constant_terms;
            for (const auto& term : expr_terms(delta)) {
                bool has_coord = false;
                for (const auto& factor : term.factors)
                    for_each_atom(factor,
                                  [&](const Expr& a) { has_coord |= a.tag == ExprTag::Coord; });
                if (!has_coord) constant_terms.push_back(term_to_expr(term));
            }
            ExprPtr constant_part =
                constant_terms.empty() ? zero() : make_sum(std::move(constant_terms));
            Rational value = exact_value(substitute(constant_part, bindings, m.space), m.space,
                                         "transformation direction");
            direction.push_back(value.to_double());
        }
    }
    return direction;
}

MassReport goldstone_count(const ModelDef& m, const VacuumConfig& v,
                           const std::vector<const Transformation*>& ts,
                           const GoldstoneOptions& opts) {
    if (opts.require_verified) {
        for (const Transformation* t : ts) {
            SymmetryVerdict verdict = verify_symmetry(m, *t);
            if (verdict.status == SymmetryStatus::Broken)
                throw SymmetryNotVerified("transformation '" + t->name +
                                          "' is not a symmetry of the model");
        }
    }
    MassReport report = mass_matrix(m, v);
    const int n = m.component_count();

    Eigen::MatrixXd h(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) h(a, b) = report.matrix[a * n + b];

    Eigen::MatrixXd stacked(n, static_cast<int>(ts.size()));
    for (size_t k = 0; k < ts.size(); ++k) {
        MassReport::DirectionCheck check;
        check.transform = ts[k]->name;
        check.direction = direction_at_vacuum(m, *ts[k], v);
        Eigen::VectorXd d(n);
        for (int a = 0; a < n; ++a) d(a) = check.direction[a];
        stacked.col(static_cast<int>(k)) = d;
        check.nonzero = d.lpNorm<Eigen::Infinity>() > 0.0;
        check.mass_residual = (h * d).lpNorm<Eigen::Infinity>();
        report.checks.push_back(std::move(check));
    }

    if (!ts.empty()) {
        double scale = stacked.lpNorm<Eigen::Infinity>();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
        qr.setThreshold(1e-9 * std::max(1.0, scale));
        report.broken_generators = scale > 0.0 ? static_cast<int>(qr.rank()) : 0;
        report.goldstone_modes = report.broken_generators;

        if (report.broken_generators > 0) {
            Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ());
            for (int c = 0; c < report.broken_generators; ++c) {
                Eigen::VectorXd col = q.col(c);
                int imax = 0;
                for (int a = 1; a < n; ++a)
                    if (std::abs(col(a)) > std::abs(col(imax))) imax = a;
                if (col(imax) < 0) col = -col;
                report.goldstone_directions.emplace_back(col.data(), col.data() + n);
            }
        }
    }

    // Group transformations whose nonzero directions are parallel: distinct
    // symmetries mapping to one null mode.
    std::vector<int> assigned(ts.size(), -1);
    for (size_t a = 0; a < ts.size(); ++a) {
        if (!report.checks[a].nonzero || assigned[a] >= 0) continue;
        assigned[a] = static_cast<int>(report.degenerate_groups.size());
        report.degenerate_groups.push_back({report.checks[a].transform});
        Eigen::VectorXd da = stacked.col(static_cast<int>(a));
        for (size_t b = a + 1; b < ts.size(); ++b) {
            if (!report.checks[b].nonzero || assigned[b] >= 0) continue;
            Eigen::VectorXd db = stacked.col(static_cast<int>(b));
            double cosine = std::abs(da.dot(db)) / (da.norm() * db.norm());
            if (std::abs(cosine - 1.0) < 1e-9) {
                assigned[b] = assigned[a];
                report.degenerate_groups.back().push_back(report.checks[b].transform);
            }
        }
    }
    return report;
}

XDecomposition generalized_residual(const ModelDef& m, const Transformation& t,
                                    const std::optional<VacuumConfig>& v) {
    XDecomposition out;
    std::vector<Binding> bindings;
    if (v) bindings = numeric_bindings(m, *v);
    for (const auto& row : second_variation_apply(m, t)) {
        SecondVariationRow constant = row;
        // Reported in the potential-Hessian convention: for T - V shaped
        // Lagrangians the constant-field reduction of the second variation
        // is minus the Hessian contraction, so the sign is flipped here and
        // the rows agree componentwise with mass_matrix times the direction.
        ExprPtr expr = canonicalize(
            make_product(Rational(-1), {drop_field_derivatives(row.expr, m.space)}), m.space);
        if (v) expr = substitute(expand_internal_indices(expr, m.space), bindings, m.space);
        constant.expr = expr;
        out.full.push_back(constant);

        for (const auto& term : expr_terms(expr)) {
            int degree = 0;
            std::optional<Index> coord;
            std::vector<ExprPtr> stripped;
            for (const auto& factor : term.factors) {
                if (factor->tag == ExprTag::Coord) {
                    ++degree;
                    coord = factor->components[0];
                } else if (factor->tag == ExprTag::Power &&
                           factor->children[0]->tag == ExprTag::Coord) {
                    degree += factor->exponent;
                    coord = factor->children[0]->components[0];
                } else {
                    stripped.push_back(factor);
                }
            }
            if (degree > 1)
                throw Error("x-degree",
                            "constant-configuration residual has coordinate degree above one");
            int key = -1;
            if (degree == 1) {
                if (!coord->is_concrete())
                    throw Error("x-degree",
                                "coordinate with symbolic index survived the constant reduction");
                key = coord->concrete;
            }
            auto& rows = out.parts[key];
            SecondVariationRow* slot = nullptr;
            for (auto& r : rows)
                if (r.field == row.field) slot = &r;
            if (slot == nullptr) {
                SecondVariationRow fresh = row;
                fresh.expr = zero();
                rows.push_back(fresh);
                slot = &rows.back();
            }
            ExprPtr piece = make_product(term.coeff, stripped);
            slot->expr = canonicalize(make_sum({slot->expr, piece}), m.space);
        }
    }
    return out;
}

ConstraintSet extra_constraints(const ModelDef& m, const std::string& ordinary,
                                const std::string& dilaton) {
    const FieldDecl* sigma = nullptr;
    if (!dilaton.empty()) {
        sigma = m.find_field(dilaton);
    } else {
        for (const auto& f : m.fields)
            if (f.dilaton) sigma = &f;
    }
    if (sigma == nullptr || sigma->kind != FieldKind::Scalar)
        throw MissingDilaton("no scalar dilaton field is declared or named");
    const FieldDecl* phi = nullptr;
    if (!ordinary.empty()) {
        phi = m.find_field(ordinary);
        if (phi == sigma) phi = nullptr;
    } else {
        for (const auto& f : m.fields)
            if (f.kind == FieldKind::Scalar && f.name != sigma->name && phi == nullptr) phi = &f;
    }
    if (phi == nullptr)
        throw MissingDilaton("no ordinary scalar to pair with the dilaton '" + sigma->name + "'");

    ConstraintSet out;
    for (int lam = 0; lam < m.space.dimension; ++lam) {
        Index conc = Index::spacetime_c(lam);
        ExprPtr a = diff_field(diff_field(m.lagrangian, make_field(sigma->name), m.space),
                               make_field(phi->name, {}, {conc}), m.space);
        ExprPtr b = diff_field(diff_field(m.lagrangian, make_field(phi->name), m.space),
                               make_field(sigma->name, {}, {conc}), m.space);
        LabeledConstraint c;
        c.label = "cross_" + std::to_string(lam);
        c.expr = canonicalize(make_sum({a, make_product(Rational(-1), {b})}), m.space);
        c.satisfied = is_zero(c.expr);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace fieldsym
