#include "fieldsym/lattice.hpp"

#include <cmath>

#include "fieldsym/errors.hpp"
#include "fieldsym/eval.hpp"

namespace fieldsym {

namespace {

// First differences balance truncation against roundoff at the cube root of
// machine epsilon; second differences at the fourth root (the roundoff term
// is eps/h^2 there, and the cube-root step leaves ~1e-6 noise, above the
// oracle tolerances).
constexpr double kGradientStepScale = 6.055454452393343e-06;   // eps^(1/3)
constexpr double kHessianStepScale = 1.220703125e-04;          // eps^(1/4)

double gradient_step(double value) {
    return kGradientStepScale * std::max(1.0, std::abs(value));
}
double hessian_step(double value) {
    return kHessianStepScale * std::max(1.0, std::abs(value));
}

}  // namespace

LatticeAction::LatticeAction(const ModelDef& m, const LatticeSpec& spec,
                             const std::map<std::string, double>& params)
    : model_(m), spec_(spec), params_(params) {
    if (spec_.sites < 4) throw UnsupportedShape("the lattice needs at least 4 sites");
    if (spec_.sites > 4096) throw UnsupportedShape("the lattice is capped at 4096 sites");
    lattice_space_ = Space{1, m.space.signature};

    for (const auto& f : model_.fields) {
        for (const auto& tuple : f.component_tuples(lattice_space_)) {
            std::string label = tuple.empty()
                                    ? f.name
                                    : f.name + "[" + std::to_string(tuple[0]) + "]";
            component_index_[label] = static_cast<int>(labels_.size());
            labels_.push_back(label);
        }
    }

    // Guard against concrete spacetime components outside the retained
    // direction before expanding.
    for_each_atom(model_.lagrangian, [&](const Expr& a) {
        auto check = [&](const Index& idx) {
            if (idx.kind == IndexKind::Spacetime && idx.is_concrete() && idx.concrete != 0)
                throw UnsupportedShape(
                    "the density references a spacetime component outside the retained "
                    "lattice direction");
        };
        for (const auto& idx : a.components) check(idx);
        for (const auto& idx : a.derivs) check(idx);
    });

    expanded_density_ = expand_all_indices(model_.lagrangian, lattice_space_);
    density_ = compile(expanded_density_);
}

LatticeAction::CompiledPoly LatticeAction::compile(const ExprPtr& e) const {
    CompiledPoly poly;
    for (const auto& term : expr_terms(e)) {
        CompiledTerm ct;
        ct.coeff = term.coeff.to_double();
        for (const auto& factor : term.factors) {
            const Expr* f = factor.get();
            int power = 1;
            if (f->tag == ExprTag::Power) {
                power = f->exponent;
                f = f->children[0].get();
            }
            switch (f->tag) {
                case ExprTag::Param: {
                    auto it = params_.find(f->name);
                    if (it == params_.end())
                        throw MissingAtom("no value for parameter '" + f->name + "'");
                    ct.coeff *= std::pow(it->second, power);
                    break;
                }
                case ExprTag::Field: {
                    std::string label = f->name;
                    if (!f->components.empty())
                        label += "[" + std::to_string(f->components[0].concrete) + "]";
                    auto it = component_index_.find(label);
                    if (it == component_index_.end())
                        throw UnsupportedShape("unknown component '" + label + "'");
                    int order = static_cast<int>(f->derivs.size());
                    if (order > 2)
                        throw UnsupportedShape("lattice jets stop at second derivatives");
                    ct.jets.emplace_back(it->second * 3 + order, power);
                    break;
                }
                case ExprTag::ExpFunc: {
                    CompiledPoly arg = compile(f->children[0]);
                    if (power != 1) {
                        for (auto& t : arg.terms) t.coeff *= power;
                    }
                    ct.exp_args.push_back(std::move(arg));
                    break;
                }
                default:
                    throw UnsupportedShape("the density carries an atom the lattice cannot hold");
            }
        }
        poly.terms.push_back(std::move(ct));
    }
    return poly;
}

double LatticeAction::eval_poly(const CompiledPoly& poly, const std::vector<double>& jets) const {
    double sum = 0.0;
    for (const auto& term : poly.terms) {
        double value = term.coeff;
        for (const auto& [slot, power] : term.jets) value *= std::pow(jets[slot], power);
        for (const auto& arg : term.exp_args) value *= std::exp(eval_poly(arg, jets));
        sum += value;
    }
    return sum;
}

double LatticeAction::jet(const std::vector<double>& config, int site, int component,
                          int order) const {
    const int n = sites();
    const double a = spec_.spacing;
    auto at = [&](int s) { return config[index_of(((s % n) + n) % n, component)]; };
    switch (order) {
        case 0:
            return at(site);
        case 1:
            return (at(site + 1) - at(site - 1)) / (2.0 * a);
        default:
            return (at(site + 2) - 2.0 * at(site) + at(site - 2)) / (4.0 * a * a);
    }
}

std::vector<double> LatticeAction::constant_config(const VacuumConfig& v) const {
    std::vector<double> config(dof(), 0.0);
    int c = 0;
    for (const auto& f : model_.fields) {
        for (const auto& tuple : f.component_tuples(lattice_space_)) {
            double value = v.value_of(f.name, tuple).to_double();
            for (int s = 0; s < sites(); ++s) config[index_of(s, c)] = value;
            ++c;
        }
    }
    return config;
}

double LatticeAction::action(const std::vector<double>& config) const {
    const int comps = components();
    std::vector<double> jets(static_cast<size_t>(comps) * 3);
    double total = 0.0;
    for (int s = 0; s < sites(); ++s) {
        for (int c = 0; c < comps; ++c)
            for (int order = 0; order < 3; ++order)
                jets[c * 3 + order] = jet(config, s, c, order);
        total += eval_poly(density_, jets);
    }
    return total * spec_.spacing;
}

double LatticeAction::action_reference(const std::vector<double>& config) const {
    double total = 0.0;
    for (int s = 0; s < sites(); ++s) {
        NumericEnv env;
        env.space = lattice_space_;
        env.params = params_;
        env.coords = {s * spec_.spacing};
        int c = 0;
        for (const auto& f : model_.fields) {
            for (const auto& tuple : f.component_tuples(lattice_space_)) {
                env.set_field(f.name, tuple, {}, jet(config, s, c, 0));
                env.set_field(f.name, tuple, {0}, jet(config, s, c, 1));
                env.set_field(f.name, tuple, {0, 0}, jet(config, s, c, 2));
                ++c;
            }
        }
        total += eval_numeric(model_.lagrangian, env);
    }
    return total * spec_.spacing;
}

std::vector<double> LatticeAction::gradient(const std::vector<double>& config) const {
    std::vector<double> grad(dof());
    std::vector<double> probe = config;
    for (int i = 0; i < dof(); ++i) {
        double h = gradient_step(config[i]);
        probe[i] = config[i] + h;
        double up = action(probe);
        probe[i] = config[i] - h;
        double down = action(probe);
        probe[i] = config[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double LatticeAction::gradient_max(const std::vector<double>& config) const {
    double m = 0.0;
    for (double g : gradient(config)) m = std::max(m, std::abs(g));
    return m;
}

std::vector<double> LatticeAction::hessian(const std::vector<double>& config) const {
    const int n = dof();
    std::vector<double> h(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> probe = config;
    const double s0 = action(config);
    std::vector<double> step(n);
    for (int i = 0; i < n; ++i) step[i] = hessian_step(config[i]);

    for (int i = 0; i < n; ++i) {
        probe[i] = config[i] + step[i];
        double up = action(probe);
        probe[i] = config[i] - step[i];
        double down = action(probe);
        probe[i] = config[i];
        h[i * n + i] = (up - 2.0 * s0 + down) / (step[i] * step[i]);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            probe[i] = config[i] + step[i];
            probe[j] = config[j] + step[j];
            double pp = action(probe);
            probe[j] = config[j] - step[j];
            double pm = action(probe);
            probe[i] = config[i] - step[i];
            double mm = action(probe);
            probe[j] = config[j] + step[j];
            double mp = action(probe);
            probe[i] = config[i];
            probe[j] = config[j];
            double value = (pp - pm - mp + mm) / (4.0 * step[i] * step[j]);
            h[i * n + j] = value;
            h[j * n + i] = value;
        }
    }
    return h;
}

std::vector<double> LatticeAction::constant_mode_block(const std::vector<double>& hess) const {
    const int comps = components();
    const int n = dof();
    std::vector<double> block(static_cast<size_t>(comps) * comps, 0.0);
    for (int c = 0; c < comps; ++c) {
        for (int d = 0; d < comps; ++d) {
            double sum = 0.0;
            for (int s = 0; s < sites(); ++s)
                for (int t = 0; t < sites(); ++t) sum += hess[index_of(s, c) * n + index_of(t, d)];
            block[c * comps + d] = sum / (spec_.spacing * sites());
        }
    }
    return block;
}

GoldstoneCheck check_generalized_goldstone(const ModelDef& m, const Transformation& t,
                                           const VacuumConfig& v, const LatticeSpec& spec,
                                           const GoldstoneCheckOptions& opts) {
    std::map<std::string, double> params;
    for (const auto& [name, value] : v.params) params[name] = value.to_double();
    params["eps0"] = 1.0;
    LatticeAction lattice(m, spec, params);
    std::vector<double> config = lattice.constant_config(v);

    GoldstoneCheck check;
    check.gradient_max = lattice.gradient_max(config);
    if (check.gradient_max > opts.solution_tolerance && !opts.allow_nonsolution)
        throw NotASolution("the configuration does not solve the discrete equations of motion "
                           "(gradient max " +
                           std::to_string(check.gradient_max) + ")");

    // Site-wise direction, including explicit coordinates and the gauge
    // function. Theta is a fixed smooth periodic wave; its lattice
    // derivatives are central differences of the sampled values, matching
    // the discretization of the action.
    const int nsites = lattice.sites();
    const double a = lattice.spacing();
    std::vector<double> theta(nsites);
    for (int s = 0; s < nsites; ++s) {
        double u = 2.0 * 3.14159265358979323846 * s / nsites;
        theta[s] = std::sin(u) + 0.3 * std::cos(2.0 * u);
    }
    auto theta_at = [&](int s) { return theta[((s % nsites) + nsites) % nsites]; };

    std::vector<double> direction(lattice.dof(), 0.0);
    for (int s = 0; s < nsites; ++s) {
        NumericEnv env;
        env.space = lattice.lattice_space();
        env.params = params;
        env.coords = {s * a};
        int c = 0;
        for (const auto& f : m.fields) {
            for (const auto& tuple : f.component_tuples(lattice.lattice_space())) {
                env.set_field(f.name, tuple, {}, lattice.jet(config, s, c, 0));
                env.set_field(f.name, tuple, {0}, lattice.jet(config, s, c, 1));
                env.set_field(f.name, tuple, {0, 0}, lattice.jet(config, s, c, 2));
                ++c;
            }
        }
        env.set_arbfn("theta", {}, theta_at(s));
        env.set_arbfn("theta", {0}, (theta_at(s + 1) - theta_at(s - 1)) / (2.0 * a));
        env.set_arbfn("theta", {0, 0},
                      (theta_at(s + 2) - 2.0 * theta_at(s) + theta_at(s - 2)) / (4.0 * a * a));

        c = 0;
        for (const auto& f : m.fields) {
            const DeltaRule* rule = t.rule_for(f.name);
            for (const auto& tuple : f.component_tuples(lattice.lattice_space())) {
                double value = 0.0;
                if (rule != nullptr) {
                    ExprPtr delta = rule->delta;
                    if (rule->component && !tuple.empty()) {
                        Index conc =
                            f.kind == FieldKind::Vector
                                ? Index::spacetime_c(tuple[0])
                                : Index::internal_c(
                                      tuple[0], static_cast<std::uint16_t>(f.multiplet_size));
                        delta = rename_symbolic_index(delta, rule->component->name, conc);
                    }
                    value = eval_numeric(delta, env);
                }
                direction[lattice.index_of(s, c)] = value;
                ++c;
            }
        }
    }

    std::vector<double> hess = lattice.hessian(config);
    const int n = lattice.dof();
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        double hd = 0.0;
        for (int j = 0; j < n; ++j) {
            row_sum += std::abs(hess[i * n + j]);
            hd += hess[i * n + j] * direction[j];
        }
        check.hessian_norm = std::max(check.hessian_norm, row_sum);
        check.residual_norm = std::max(check.residual_norm, std::abs(hd));
    }
    check.residual = check.hessian_norm > 0 ? check.residual_norm / check.hessian_norm
                                            : check.residual_norm;
    return check;
}

}  // namespace fieldsym
