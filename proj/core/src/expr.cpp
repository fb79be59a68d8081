#include "fieldsym/expr.hpp"

#include <algorithm>
#include <sstream>

namespace fieldsym {

namespace {

ExprPtr make_node(ExprTag tag) { return std::make_shared<Expr>(tag); }

Expr& mut(ExprPtr& p) { return const_cast<Expr&>(*p); }

}  // namespace

ExprPtr make_number(Rational value) {
    auto e = make_node(ExprTag::Number);
    mut(e).number = value;
    return e;
}

ExprPtr make_param(std::string name) {
    auto e = make_node(ExprTag::Param);
    mut(e).name = std::move(name);
    return e;
}

ExprPtr make_coord(Index idx) {
    auto e = make_node(ExprTag::Coord);
    mut(e).components = {std::move(idx)};
    return e;
}

ExprPtr make_field(std::string name, std::vector<Index> components, std::vector<Index> derivs) {
    auto e = make_node(ExprTag::Field);
    mut(e).name = std::move(name);
    mut(e).components = std::move(components);
    mut(e).derivs = std::move(derivs);
    std::sort(mut(e).derivs.begin(), mut(e).derivs.end());
    return e;
}

ExprPtr make_arbfn(std::string name, std::vector<Index> derivs) {
    auto e = make_node(ExprTag::ArbFn);
    mut(e).name = std::move(name);
    mut(e).derivs = std::move(derivs);
    std::sort(mut(e).derivs.begin(), mut(e).derivs.end());
    return e;
}

ExprPtr make_metric(Index a, Index b) {
    auto e = make_node(ExprTag::Metric);
    mut(e).components = {std::move(a), std::move(b)};
    return e;
}

ExprPtr make_epsilon(Index a, Index b) {
    auto e = make_node(ExprTag::Epsilon);
    mut(e).components = {std::move(a), std::move(b)};
    return e;
}

ExprPtr make_delta(Index a, Index b) {
    auto e = make_node(ExprTag::Delta);
    mut(e).components = {std::move(a), std::move(b)};
    return e;
}

ExprPtr make_trig(TrigKind kind, std::string field_name) {
    auto e = make_node(ExprTag::Trig);
    mut(e).trig = kind;
    mut(e).name = std::move(field_name);
    return e;
}

ExprPtr make_exp(ExprPtr arg) {
    auto e = make_node(ExprTag::ExpFunc);
    mut(e).children = {std::move(arg)};
    return e;
}

ExprPtr make_power(ExprPtr base, int exponent) {
    auto e = make_node(ExprTag::Power);
    mut(e).children = {std::move(base)};
    mut(e).exponent = exponent;
    return e;
}

ExprPtr make_product(Rational coeff, std::vector<ExprPtr> factors) {
    auto e = make_node(ExprTag::Product);
    mut(e).number = coeff;
    mut(e).children = std::move(factors);
    return e;
}

ExprPtr make_sum(std::vector<ExprPtr> terms) {
    auto e = make_node(ExprTag::Sum);
    mut(e).children = std::move(terms);
    return e;
}

ExprPtr zero() {
    static const ExprPtr z = make_number(0);
    return z;
}

ExprPtr one() {
    static const ExprPtr o = make_number(1);
    return o;
}

ExprPtr operator+(const ExprPtr& a, const ExprPtr& b) { return make_sum({a, b}); }
ExprPtr operator-(const ExprPtr& a, const ExprPtr& b) {
    return make_sum({a, make_product(Rational(-1), {b})});
}
ExprPtr operator*(const ExprPtr& a, const ExprPtr& b) { return make_product(Rational(1), {a, b}); }
ExprPtr operator-(const ExprPtr& a) { return make_product(Rational(-1), {a}); }
ExprPtr operator*(const Rational& c, const ExprPtr& a) { return make_product(c, {a}); }

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

namespace {

int compare_index(const Index& a, const Index& b) {
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    if (a.is_concrete() != b.is_concrete()) return a.is_concrete() ? -1 : 1;
    if (a.concrete != b.concrete) return a.concrete < b.concrete ? -1 : 1;
    if (a.name != b.name) return a.name < b.name ? -1 : 1;
    return 0;
}

int compare_indices(const std::vector<Index>& a, const std::vector<Index>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = 0; i < a.size(); ++i) {
        if (int c = compare_index(a[i], b[i]); c != 0) return c;
    }
    return 0;
}

int compare_rational(const Rational& a, const Rational& b) {
    if (a == b) return 0;
    return a < b ? -1 : 1;
}

}  // namespace

int compare(const Expr& a, const Expr& b) {
    if (a.tag != b.tag) return a.tag < b.tag ? -1 : 1;
    switch (a.tag) {
        case ExprTag::Number:
            return compare_rational(a.number, b.number);
        case ExprTag::Param:
            return a.name.compare(b.name);
        case ExprTag::Coord:
        case ExprTag::Metric:
        case ExprTag::Epsilon:
        case ExprTag::Delta:
            return compare_indices(a.components, b.components);
        case ExprTag::Field:
        case ExprTag::ArbFn: {
            if (int c = a.name.compare(b.name); c != 0) return c;
            if (a.derivs.size() != b.derivs.size())
                return a.derivs.size() < b.derivs.size() ? -1 : 1;
            if (int c = compare_indices(a.components, b.components); c != 0) return c;
            return compare_indices(a.derivs, b.derivs);
        }
        case ExprTag::Trig: {
            if (a.trig != b.trig) return a.trig < b.trig ? -1 : 1;
            return a.name.compare(b.name);
        }
        case ExprTag::ExpFunc:
            return compare(*a.children[0], *b.children[0]);
        case ExprTag::Power: {
            if (int c = compare(*a.children[0], *b.children[0]); c != 0) return c;
            if (a.exponent != b.exponent) return a.exponent < b.exponent ? -1 : 1;
            return 0;
        }
        case ExprTag::Product: {
            if (a.children.size() != b.children.size())
                return a.children.size() < b.children.size() ? -1 : 1;
            for (size_t i = 0; i < a.children.size(); ++i) {
                if (int c = compare(*a.children[i], *b.children[i]); c != 0) return c;
            }
            return compare_rational(a.number, b.number);
        }
        case ExprTag::Sum: {
            if (a.children.size() != b.children.size())
                return a.children.size() < b.children.size() ? -1 : 1;
            for (size_t i = 0; i < a.children.size(); ++i) {
                if (int c = compare(*a.children[i], *b.children[i]); c != 0) return c;
            }
            return 0;
        }
    }
    return 0;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a.get() == b.get()) return true;
    return compare(*a, *b) == 0;
}

bool is_zero(const ExprPtr& e) { return e->tag == ExprTag::Number && e->number.is_zero(); }
bool is_number(const ExprPtr& e) { return e->tag == ExprTag::Number; }

// ---------------------------------------------------------------------------
// Debug rendering
// ---------------------------------------------------------------------------

namespace {

void debug_write(const ExprPtr& e, std::ostringstream& out) {
    switch (e->tag) {
        case ExprTag::Number:
            out << e->number.str();
            break;
        case ExprTag::Param:
            out << e->name;
            break;
        case ExprTag::Coord:
            out << "x(" << e->components[0].str() << ")";
            break;
        case ExprTag::Field: {
            for (size_t i = 0; i < e->derivs.size(); ++i) out << "D[" << e->derivs[i].str() << "]";
            out << e->name;
            if (!e->components.empty()) {
                out << "[";
                for (size_t i = 0; i < e->components.size(); ++i) {
                    if (i) out << ",";
                    out << e->components[i].str();
                }
                out << "]";
            }
            break;
        }
        case ExprTag::ArbFn: {
            for (size_t i = 0; i < e->derivs.size(); ++i) out << "D[" << e->derivs[i].str() << "]";
            out << e->name;
            break;
        }
        case ExprTag::Metric:
            out << "g(" << e->components[0].str() << "," << e->components[1].str() << ")";
            break;
        case ExprTag::Epsilon:
            out << "eps(" << e->components[0].str() << "," << e->components[1].str() << ")";
            break;
        case ExprTag::Delta:
            out << "kd(" << e->components[0].str() << "," << e->components[1].str() << ")";
            break;
        case ExprTag::Trig:
            out << (e->trig == TrigKind::Cos ? "cos(" : "sin(") << e->name << ")";
            break;
        case ExprTag::ExpFunc:
            out << "exp(";
            debug_write(e->children[0], out);
            out << ")";
            break;
        case ExprTag::Power:
            out << "(";
            debug_write(e->children[0], out);
            out << ")^" << e->exponent;
            break;
        case ExprTag::Product: {
            out << "(" << e->number.str();
            for (const auto& f : e->children) {
                out << "*";
                debug_write(f, out);
            }
            out << ")";
            break;
        }
        case ExprTag::Sum: {
            out << "(";
            for (size_t i = 0; i < e->children.size(); ++i) {
                if (i) out << " + ";
                debug_write(e->children[i], out);
            }
            out << ")";
            break;
        }
    }
}

}  // namespace

std::string debug_string(const ExprPtr& e) {
    std::ostringstream out;
    debug_write(e, out);
    return out.str();
}

}  // namespace fieldsym
