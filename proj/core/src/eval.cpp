#include "fieldsym/eval.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "fieldsym/canon.hpp"
#include "fieldsym/errors.hpp"

namespace fieldsym {

namespace {

int epsilon_value(int a, int b) {
    if (a == b) return 0;
    return (a == 1 && b == 2) ? 1 : -1;
}

struct Evaluator {
    const NumericEnv& env;
    std::set<std::string> missing;

    int resolve_index(const Index& idx) {
        if (idx.is_concrete()) return idx.concrete;
        auto it = env.index_values.find(idx.name);
        if (it == env.index_values.end())
            throw MissingAtom("no value for free index '" + idx.name + "'");
        return it->second;
    }

    double atom_value(const Expr& a) {
        switch (a.tag) {
            case ExprTag::Number:
                return a.number.to_double();
            case ExprTag::Param: {
                auto it = env.params.find(a.name);
                if (it == env.params.end()) {
                    missing.insert("param " + a.name);
                    return 0.0;
                }
                return it->second;
            }
            case ExprTag::Coord: {
                int mu = resolve_index(a.components[0]);
                return (mu >= 0 && mu < static_cast<int>(env.coords.size())) ? env.coords[mu] : 0.0;
            }
            case ExprTag::Metric: {
                int mu = resolve_index(a.components[0]);
                int nu = resolve_index(a.components[1]);
                return mu == nu ? env.space.metric_entry(mu) : 0.0;
            }
            case ExprTag::Delta: {
                return resolve_index(a.components[0]) == resolve_index(a.components[1]) ? 1.0 : 0.0;
            }
            case ExprTag::Epsilon: {
                return epsilon_value(resolve_index(a.components[0]),
                                     resolve_index(a.components[1]));
            }
            case ExprTag::Field: {
                std::vector<int> comps, derivs;
                for (const auto& idx : a.components) comps.push_back(resolve_index(idx));
                for (const auto& idx : a.derivs) derivs.push_back(resolve_index(idx));
                std::sort(derivs.begin(), derivs.end());
                auto key = NumericEnv::atom_key(a.name, comps, derivs);
                auto it = env.field_values.find(key);
                if (it == env.field_values.end()) {
                    missing.insert("field " + key);
                    return 0.0;
                }
                return it->second;
            }
            case ExprTag::ArbFn: {
                std::vector<int> derivs;
                for (const auto& idx : a.derivs) derivs.push_back(resolve_index(idx));
                std::sort(derivs.begin(), derivs.end());
                auto key = NumericEnv::atom_key(a.name, {}, derivs);
                auto it = env.arbfn_values.find(key);
                if (it == env.arbfn_values.end()) {
                    missing.insert("function " + key);
                    return 0.0;
                }
                return it->second;
            }
            case ExprTag::Trig: {
                auto key = NumericEnv::atom_key(a.name, {}, {});
                auto it = env.field_values.find(key);
                if (it == env.field_values.end()) {
                    missing.insert("field " + key);
                    return 0.0;
                }
                return a.trig == TrigKind::Cos ? std::cos(it->second) : std::sin(it->second);
            }
            default:
                throw Error("eval-internal", "unexpected atom in evaluation");
        }
    }

    double eval(const ExprPtr& e) {
        switch (e->tag) {
            case ExprTag::Sum: {
                double s = 0.0;
                for (const auto& c : e->children) s += eval(c);
                return s;
            }
            case ExprTag::Product:
                return eval_term(e->number, e->children);
            case ExprTag::Power:
                return std::pow(eval(e->children[0]), e->exponent);
            case ExprTag::ExpFunc:
                return std::exp(eval(e->children[0]));
            default:
                return eval_term(Rational(1), {e});
        }
    }

    // Evaluate one product term, summing its contracted (dummy) indices.
    double eval_term(const Rational& coeff, const std::vector<ExprPtr>& factors) {
        // Gather dummy indices of this term.
        std::map<std::string, std::pair<IndexKind, int>> counts;  // name -> kind, occurrences
        std::map<std::string, int> ranges;
        for (const auto& f : factors) {
            auto scan = [&](const std::vector<Index>& slots) {
                for (const auto& idx : slots) {
                    if (idx.is_concrete()) continue;
                    if (env.index_values.count(idx.name)) continue;  // caller-bound
                    auto& entry = counts[idx.name];
                    entry.first = idx.kind;
                    entry.second++;
                    ranges[idx.name] = idx.kind == IndexKind::Internal ? idx.range
                                                                       : env.space.dimension;
                }
            };
            scan(f->components);
            scan(f->derivs);
        }
        std::vector<std::string> dummies;
        for (const auto& [name, info] : counts) {
            if (info.second > 2)
                throw IndexViolation("index '" + name + "' appears more than twice in a term");
            if (info.second == 1)
                throw MissingAtom("no value for free index '" + name + "'");
            dummies.push_back(name);
        }

        double total = 0.0;
        std::vector<int> values(dummies.size(),
                                0);  // internal values start at 1; adjust below
        std::vector<int> lo(dummies.size()), hi(dummies.size());
        for (size_t k = 0; k < dummies.size(); ++k) {
            bool internal = counts[dummies[k]].first == IndexKind::Internal;
            lo[k] = internal ? 1 : 0;
            hi[k] = internal ? ranges[dummies[k]] : env.space.dimension - 1;
            values[k] = lo[k];
        }
        // Odometer over all dummy assignments.
        while (true) {
            NumericEnv local = env;
            for (size_t k = 0; k < dummies.size(); ++k) local.index_values[dummies[k]] = values[k];
            Evaluator inner{local, {}};
            double prod = coeff.to_double();
            for (const auto& f : factors) {
                double v;
                if (f->tag == ExprTag::Power)
                    v = std::pow(inner.eval_factor(f->children[0]), f->exponent);
                else
                    v = inner.eval_factor(f);
                prod *= v;
            }
            missing.insert(inner.missing.begin(), inner.missing.end());
            total += prod;
            // Advance.
            size_t k = 0;
            for (; k < dummies.size(); ++k) {
                if (values[k] < hi[k]) {
                    values[k]++;
                    for (size_t j = 0; j < k; ++j) values[j] = lo[j];
                    break;
                }
            }
            if (k == dummies.size()) break;
            if (dummies.empty()) break;
        }
        return total;
    }

    double eval_factor(const ExprPtr& f) {
        if (f->tag == ExprTag::ExpFunc) return std::exp(eval(f->children[0]));
        if (f->tag == ExprTag::Power) return std::pow(eval_factor(f->children[0]), f->exponent);
        if (f->tag == ExprTag::Sum || f->tag == ExprTag::Product) return eval(f);
        return atom_value(*f);
    }
};

}  // namespace

std::string NumericEnv::atom_key(const std::string& name, const std::vector<int>& components,
                                 const std::vector<int>& derivs) {
    std::ostringstream out;
    out << name;
    if (!components.empty()) {
        out << "[";
        for (size_t i = 0; i < components.size(); ++i) {
            if (i) out << ",";
            out << components[i];
        }
        out << "]";
    }
    if (!derivs.empty()) {
        out << "@";
        for (size_t i = 0; i < derivs.size(); ++i) {
            if (i) out << ",";
            out << derivs[i];
        }
    }
    return out.str();
}

void NumericEnv::set_field(const std::string& name, const std::vector<int>& components,
                           const std::vector<int>& derivs, double value) {
    auto sorted = derivs;
    std::sort(sorted.begin(), sorted.end());
    field_values[atom_key(name, components, sorted)] = value;
}

void NumericEnv::set_arbfn(const std::string& name, const std::vector<int>& derivs, double value) {
    auto sorted = derivs;
    std::sort(sorted.begin(), sorted.end());
    arbfn_values[atom_key(name, {}, sorted)] = value;
}

double eval_numeric(const ExprPtr& e, const NumericEnv& env) {
    ExprPtr canon = canonicalize(e, env.space);
    Evaluator ev{env, {}};
    double value = ev.eval(canon);
    if (!ev.missing.empty()) {
        std::string what = "unassigned atoms:";
        for (const auto& m : ev.missing) what += " " + m;
        throw MissingAtom(what);
    }
    return value;
}

}  // namespace fieldsym
