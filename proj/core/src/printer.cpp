#include "fieldsym/printer.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "fieldsym/errors.hpp"

namespace fieldsym {

namespace {

const char* kSpacetimePool[] = {"mu", "nu", "al", "be", "ga", "de", "rho", "si", "ta", "ka"};
const char* kInternalPool[] = {"i", "j", "k", "l", "p", "q"};

// Maps machine-generated dummy names to readable ones, never colliding with
// the reserved set or with free indices of the expression.
class DummyNames {
  public:
    DummyNames(const ExprPtr& e, std::set<std::string> reserved) : reserved_(std::move(reserved)) {
        for (const auto& idx : free_indices(e))
            if (!idx.is_concrete()) reserved_.insert(idx.name);
    }

    std::string lookup(const Index& idx) {
        if (idx.is_concrete()) return std::to_string(idx.concrete);
        if (idx.name.empty() || idx.name[0] != '.') return idx.name;  // user-named
        auto it = names_.find(idx.name);
        if (it != names_.end()) return it->second;
        std::string fresh = next_name(idx.kind);
        names_.emplace(idx.name, fresh);
        return fresh;
    }

  private:
    std::string next_name(IndexKind kind) {
        const char** pool = kind == IndexKind::Spacetime ? kSpacetimePool : kInternalPool;
        size_t pool_size = kind == IndexKind::Spacetime ? 10 : 6;
        size_t& counter = kind == IndexKind::Spacetime ? st_counter_ : in_counter_;
        while (true) {
            std::string candidate;
            if (counter < pool_size) {
                candidate = pool[counter];
            } else {
                candidate = std::string(pool[counter % pool_size]) +
                            std::to_string(counter / pool_size);
            }
            ++counter;
            if (!reserved_.count(candidate) && !is_reserved_word(candidate)) return candidate;
        }
    }

    std::set<std::string> reserved_;
    std::map<std::string, std::string> names_;
    size_t st_counter_ = 0;
    size_t in_counter_ = 0;
};

struct ExprPrinter {
    DummyNames names;

    std::string index(const Index& idx) { return names.lookup(idx); }

    std::string atom(const Expr& e) {
        std::ostringstream out;
        switch (e.tag) {
            case ExprTag::Param:
                out << e.name;
                break;
            case ExprTag::Coord:
                out << "x(" << index(e.components[0]) << ")";
                break;
            case ExprTag::Metric:
                out << "g(" << index(e.components[0]) << "," << index(e.components[1]) << ")";
                break;
            case ExprTag::Epsilon:
                out << "eps(" << index(e.components[0]) << "," << index(e.components[1]) << ")";
                break;
            case ExprTag::Delta:
                out << "kd(" << index(e.components[0]) << "," << index(e.components[1]) << ")";
                break;
            case ExprTag::Field: {
                std::string core = e.name;
                if (!e.components.empty()) core += "[" + index(e.components[0]) + "]";
                for (const auto& d : e.derivs) core = "d(" + core + "," + index(d) + ")";
                out << core;
                break;
            }
            case ExprTag::ArbFn: {
                std::string core = e.name;
                for (const auto& d : e.derivs) core = "d(" + core + "," + index(d) + ")";
                out << core;
                break;
            }
            case ExprTag::Trig:
                throw ValidationError("trigonometric atoms have no model-file form");
            default:
                throw Error("print-internal", "unexpected node in atom position");
        }
        return out.str();
    }

    std::string factor(const ExprPtr& f) {
        switch (f->tag) {
            case ExprTag::ExpFunc:
                return "exp(" + print(f->children[0]) + ")";
            case ExprTag::Power: {
                std::string base = factor(f->children[0]);
                return base + "^" + (f->exponent < 0 ? "-" : "") +
                       std::to_string(std::abs(f->exponent));
            }
            case ExprTag::Sum:
                return "(" + print(f) + ")";
            case ExprTag::Number:
                return rational(f->number, /*leading=*/false);
            default:
                return atom(*f);
        }
    }

    static std::string rational(const Rational& r, bool leading) {
        std::string s;
        if (r.den() == 1) {
            s = std::to_string(std::abs(r.num()));
        } else {
            s = "(" + std::to_string(std::abs(r.num())) + "/" + std::to_string(r.den()) + ")";
        }
        if (r.is_negative() && leading) s = "-" + s;
        return s;
    }

    // One canonical term: coefficient and factors.
    std::string term(const Term& t, bool first) {
        std::ostringstream out;
        bool negative = t.coeff.is_negative();
        Rational mag = negative ? -t.coeff : t.coeff;
        if (first) {
            if (negative) out << "-";
        } else {
            out << (negative ? " - " : " + ");
        }
        bool need_star = false;
        if (!mag.is_one() || t.factors.empty()) {
            out << rational(mag, false);
            need_star = true;
        }
        for (const auto& f : t.factors) {
            if (need_star) out << "*";
            out << factor(f);
            need_star = true;
        }
        return out.str();
    }

    std::string print(const ExprPtr& e) {
        auto terms = expr_terms(e);
        if (terms.empty()) return "0";
        std::ostringstream out;
        for (size_t i = 0; i < terms.size(); ++i) out << term(terms[i], i == 0);
        return out.str();
    }
};

}  // namespace

std::string print_expr(const ExprPtr& e, const std::set<std::string>& reserved) {
    ExprPrinter printer{DummyNames(e, reserved)};
    return printer.print(e);
}

std::string print_model(const ModelDef& m) {
    std::set<std::string> reserved;
    for (const auto& p : m.params) reserved.insert(p);
    for (const auto& f : m.fields) reserved.insert(f.name);

    std::ostringstream out;
    out << "model " << m.name << "\n";
    out << "dimension " << m.space.dimension << "\n";
    out << "signature "
        << (m.space.signature == MetricSignature::MostlyMinus ? "mostly-minus" : "mostly-plus")
        << "\n";
    if (!m.params.empty()) {
        out << "param";
        for (const auto& p : m.params) out << " " << p;
        out << "\n";
    }
    for (const auto& f : m.fields) {
        out << "field " << f.name;
        if (f.kind == FieldKind::Multiplet) out << "[" << f.multiplet_size << "]";
        out << (f.kind == FieldKind::Vector ? " vector" : " scalar");
        if (!(f.weight == Rational(1))) {
            out << " weight " << f.weight.num();
            if (f.weight.den() != 1) out << "/" << f.weight.den();
        }
        if (f.dilaton) out << " dilaton";
        out << "\n";
    }
    out << "lagrangian = " << print_expr(m.lagrangian, reserved) << "\n";
    for (const auto& t : m.transforms) {
        const char* kind = t.kind == TransformKind::Global
                               ? "global"
                               : (t.kind == TransformKind::Local ? "local" : "spacetime");
        out << "transform " << t.name << " " << kind << " {\n";
        for (const auto& rule : t.deltas) {
            std::set<std::string> local = reserved;
            out << "  delta " << rule.field;
            if (rule.component) {
                out << "[" << rule.component->name << "]";
                local.insert(rule.component->name);
            }
            out << " = " << print_expr(rule.delta, local) << "\n";
        }
        out << "}\n";
    }
    return out.str();
}

}  // namespace fieldsym
