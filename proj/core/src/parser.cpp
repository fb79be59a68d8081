#include "fieldsym/parser.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fieldsym {

std::string ParseError::render(const std::string& source) const {
    std::ostringstream out;
    out << "parse error at line " << line << ", column " << column << ": " << message;
    if (!expected.empty()) {
        out << " (expected ";
        for (size_t i = 0; i < expected.size(); ++i) {
            if (i) out << (i + 1 == expected.size() ? " or " : ", ");
            out << expected[i];
        }
        out << ")";
    }
    // Caret rendering of the offending line.
    size_t start = 0;
    int cur = 1;
    while (cur < line && start < source.size()) {
        if (source[start] == '\n') ++cur;
        ++start;
    }
    size_t end = start;
    while (end < source.size() && source[end] != '\n') ++end;
    if (start <= source.size()) {
        out << "\n  " << source.substr(start, end - start) << "\n  ";
        for (int i = 1; i < column; ++i) out << ' ';
        out << '^';
    }
    return out.str();
}

namespace {

enum class Tok : std::uint8_t { Ident, Int, Sym, End };

struct Token {
    Tok type = Tok::End;
    std::string text;        // identifier text
    std::int64_t value = 0;  // integer value
    char sym = 0;
    size_t offset = 0;
    int line = 1;
    int column = 1;
};

struct Lexer {
    const std::string& src;
    size_t pos = 0;
    int line = 1;
    int column = 1;

    explicit Lexer(const std::string& s) : src(s) {}

    void advance() {
        if (pos < src.size() && src[pos] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
        ++pos;
    }

    void skip_space() {
        while (pos < src.size()) {
            char c = src[pos];
            if (c == '#') {
                while (pos < src.size() && src[pos] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    Token next() {
        skip_space();
        Token t;
        t.offset = pos;
        t.line = line;
        t.column = column;
        if (pos >= src.size()) {
            t.type = Tok::End;
            return t;
        }
        char c = src[pos];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
                word.push_back(src[pos]);
                advance();
            }
            t.type = Tok::Ident;
            t.text = std::move(word);
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::int64_t v = 0;
            bool overflow = false;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                if (__builtin_mul_overflow(v, 10, &v) ||
                    __builtin_add_overflow(v, src[pos] - '0', &v))
                    overflow = true;
                advance();
            }
            t.type = Tok::Int;
            t.value = v;
            if (overflow) {
                t.type = Tok::Sym;  // forces a syntax error at the use site
                t.sym = '?';
            }
            return t;
        }
        t.type = Tok::Sym;
        t.sym = c;
        advance();
        return t;
    }
};

[[noreturn]] void fail(const Token& at, std::string message,
                       std::vector<std::string> expected = {}) {
    ParseError err;
    err.offset = at.offset;
    err.line = at.line;
    err.column = at.column;
    err.message = std::move(message);
    err.expected = std::move(expected);
    throw ParseFailure(std::move(err));
}

[[noreturn]] void invalid(const Token& at, const std::string& message) {
    throw ValidationError("line " + std::to_string(at.line) + ", column " +
                          std::to_string(at.column) + ": " + message);
}

// Raw index reference before kind resolution.
struct IndexRef {
    bool concrete = false;
    std::int64_t value = 0;
    std::string name;
    Token tok;
};

constexpr std::uint16_t kUnresolvedRange = 0xffff;

struct Parser {
    Lexer lexer;
    Token tok;
    ModelDef model;
    bool seen_lagrangian = false;

    explicit Parser(const std::string& text) : lexer(text) { tok = lexer.next(); }

    void bump() { tok = lexer.next(); }

    bool at_ident(const char* word) const { return tok.type == Tok::Ident && tok.text == word; }
    bool at_sym(char c) const { return tok.type == Tok::Sym && tok.sym == c; }

    void expect_sym(char c, const char* what) {
        if (!at_sym(c))
            fail(tok, std::string("unexpected token"), {std::string("'") + c + "' " + what});
        bump();
    }

    std::string expect_ident(const char* what) {
        if (tok.type != Tok::Ident) fail(tok, "unexpected token", {std::string(what)});
        std::string word = tok.text;
        bump();
        return word;
    }

    std::int64_t expect_int(const char* what) {
        if (tok.type != Tok::Int) fail(tok, "unexpected token", {std::string(what)});
        std::int64_t v = tok.value;
        bump();
        return v;
    }

    // ----- model items ------------------------------------------------

    ModelDef parse() {
        if (!at_ident("model")) fail(tok, "every model file starts with a model header", {"model"});
        bump();
        model.name = expect_ident("model name");
        while (tok.type != Tok::End) parse_item();
        validate_model(model);
        return std::move(model);
    }

    void parse_item() {
        if (at_ident("dimension")) {
            Token at = tok;
            bump();
            model.space.dimension = static_cast<int>(expect_int("dimension value"));
            if (model.space.dimension < 1 || model.space.dimension > 16)
                invalid(at, "dimension must be between 1 and 16");
            return;
        }
        if (at_ident("signature")) {
            bump();
            Token at = tok;
            std::string head = expect_ident("mostly-minus or mostly-plus");
            if (head != "mostly") invalid(at, "unknown signature '" + head + "'");
            expect_sym('-', "in signature");
            std::string tail = expect_ident("minus or plus");
            if (tail == "minus")
                model.space.signature = MetricSignature::MostlyMinus;
            else if (tail == "plus")
                model.space.signature = MetricSignature::MostlyPlus;
            else
                invalid(at, "unknown signature 'mostly-" + tail + "'");
            return;
        }
        if (at_ident("param")) {
            bump();
            if (tok.type != Tok::Ident) fail(tok, "param needs at least one name", {"identifier"});
            while (tok.type == Tok::Ident && !is_item_keyword(tok.text)) {
                check_declarable(tok);
                model.params.push_back(tok.text);
                bump();
            }
            return;
        }
        if (at_ident("field")) {
            bump();
            parse_field();
            return;
        }
        if (at_ident("lagrangian")) {
            Token at = tok;
            bump();
            expect_sym('=', "after lagrangian");
            if (seen_lagrangian) invalid(at, "duplicate lagrangian");
            seen_lagrangian = true;
            model.lagrangian = parse_expression_resolved(std::nullopt);
            return;
        }
        if (at_ident("transform")) {
            bump();
            parse_transform();
            return;
        }
        fail(tok, "unknown item",
             {"dimension", "signature", "param", "field", "lagrangian", "transform"});
    }

    static bool is_item_keyword(const std::string& w) {
        return w == "dimension" || w == "signature" || w == "param" || w == "field" ||
               w == "lagrangian" || w == "transform" || w == "delta";
    }

    void check_declarable(const Token& at) {
        if (is_reserved_word(at.text)) invalid(at, "'" + at.text + "' is a reserved word");
        if (model.has_param(at.text) || model.find_field(at.text))
            invalid(at, "'" + at.text + "' is already declared");
    }

    void parse_field() {
        Token at = tok;
        FieldDecl decl;
        decl.name = expect_ident("field name");
        check_declarable(at);
        if (at_sym('[')) {
            bump();
            decl.multiplet_size = static_cast<int>(expect_int("multiplet size"));
            expect_sym(']', "after multiplet size");
            decl.kind = FieldKind::Multiplet;
        }
        Token kat = tok;
        std::string kind = expect_ident("scalar or vector");
        if (kind == "scalar") {
            if (decl.kind != FieldKind::Multiplet) decl.kind = FieldKind::Scalar;
        } else if (kind == "vector") {
            if (decl.kind == FieldKind::Multiplet)
                invalid(kat, "a field cannot be both a multiplet and a vector");
            decl.kind = FieldKind::Vector;
        } else {
            invalid(kat, "field kind must be scalar or vector");
        }
        while (tok.type == Tok::Ident && (tok.text == "weight" || tok.text == "dilaton")) {
            if (tok.text == "dilaton") {
                decl.dilaton = true;
                bump();
            } else {
                bump();
                bool negative = false;
                if (at_sym('-')) {
                    negative = true;
                    bump();
                }
                std::int64_t num = expect_int("weight numerator");
                std::int64_t den = 1;
                if (at_sym('/')) {
                    bump();
                    den = expect_int("weight denominator");
                }
                decl.weight = Rational(negative ? -num : num, den);
            }
        }
        model.fields.push_back(std::move(decl));
    }

    void parse_transform() {
        Transformation t;
        Token at = tok;
        t.name = expect_ident("transformation name");
        std::optional<std::string> family_index;
        if (at_sym('[')) {
            bump();
            family_index = expect_ident("family index");
            expect_sym(']', "after family index");
        }
        Token kat = tok;
        std::string kind = expect_ident("global, local or spacetime");
        if (kind == "global")
            t.kind = TransformKind::Global;
        else if (kind == "local")
            t.kind = TransformKind::Local;
        else if (kind == "spacetime")
            t.kind = TransformKind::Spacetime;
        else
            invalid(kat, "transformation kind must be global, local or spacetime");
        (void)at;
        expect_sym('{', "before delta rules");
        while (!at_sym('}')) {
            if (tok.type == Tok::End) fail(tok, "unterminated transformation", {"delta", "'}'"});
            if (!at_ident("delta")) fail(tok, "unexpected token", {"delta", "'}'"});
            bump();
            DeltaRule rule;
            Token fat = tok;
            rule.field = expect_ident("field name");
            const FieldDecl* decl = model.find_field(rule.field);
            if (decl == nullptr) invalid(fat, "unknown field '" + rule.field + "'");
            if (at_sym('[')) {
                bump();
                Token iat = tok;
                std::string idx = expect_ident("component index");
                expect_sym(']', "after component index");
                auto comp = decl->component_index(idx);
                if (!comp) invalid(iat, "scalar field '" + rule.field + "' takes no index");
                if (model.has_param(idx) || model.find_field(idx))
                    invalid(iat, "'" + idx + "' is declared and cannot be an index");
                rule.component = comp;
            } else if (decl->kind != FieldKind::Scalar) {
                invalid(fat, "field '" + rule.field + "' needs a component index");
            }
            expect_sym('=', "after delta header");
            rule.delta = parse_expression_resolved(rule.component);
            t.deltas.push_back(std::move(rule));
        }
        bump();  // '}'
        if (family_index) {
            // A transformation family indexed by one spacetime index expands
            // into one member per dimension value.
            for (int v = 0; v < model.space.dimension; ++v) {
                Transformation member;
                member.name = t.name + "_" + std::to_string(v);
                member.kind = t.kind;
                for (const auto& rule : t.deltas) {
                    DeltaRule r = rule;
                    r.delta =
                        rename_symbolic_index(r.delta, *family_index, Index::spacetime_c(v));
                    member.deltas.push_back(std::move(r));
                }
                model.transforms.push_back(std::move(member));
            }
        } else {
            model.transforms.push_back(std::move(t));
        }
    }

    // ----- expressions -------------------------------------------------

    ExprPtr parse_expression_resolved(const std::optional<Index>& header_index) {
        ExprPtr raw = parse_expr();
        return resolve_delta_kinds(raw, header_index);
    }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        while (at_sym('+') || at_sym('-')) {
            bool minus = tok.sym == '-';
            bump();
            ExprPtr rhs = parse_term();
            lhs = minus ? make_sum({lhs, make_product(Rational(-1), {rhs})})
                        : make_sum({lhs, rhs});
        }
        return lhs;
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_unary();
        while (at_sym('*') || at_sym('/')) {
            bool divide = tok.sym == '/';
            bump();
            ExprPtr rhs = parse_unary();
            lhs = divide ? make_product(Rational(1), {lhs, make_power(rhs, -1)})
                         : make_product(Rational(1), {lhs, rhs});
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (at_sym('-')) {
            bump();
            return make_product(Rational(-1), {parse_unary()});
        }
        if (at_sym('+')) {
            bump();
            return parse_unary();
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr base = parse_primary();
        while (at_sym('^')) {
            bump();
            bool negative = false;
            if (at_sym('-')) {
                negative = true;
                bump();
            }
            Token at = tok;
            std::int64_t e = expect_int("integer exponent");
            if (e > 64) invalid(at, "exponent too large");
            base = make_power(base, static_cast<int>(negative ? -e : e));
        }
        return base;
    }

    IndexRef parse_index_ref() {
        IndexRef ref;
        ref.tok = tok;
        if (tok.type == Tok::Int) {
            ref.concrete = true;
            ref.value = tok.value;
            bump();
            return ref;
        }
        if (tok.type == Tok::Ident) {
            if (model.has_param(tok.text) || model.find_field(tok.text))
                invalid(tok, "'" + tok.text + "' is declared and cannot be an index");
            if (is_reserved_word(tok.text)) invalid(tok, "'" + tok.text + "' cannot be an index");
            ref.name = tok.text;
            bump();
            return ref;
        }
        fail(tok, "expected an index", {"identifier", "integer"});
    }

    Index spacetime_index(const IndexRef& ref) {
        if (ref.concrete) {
            if (ref.value < 0 || ref.value >= model.space.dimension)
                invalid(ref.tok, "spacetime component out of range");
            return Index::spacetime_c(static_cast<std::int32_t>(ref.value));
        }
        return Index::spacetime(ref.name);
    }

    Index internal_index(const IndexRef& ref, int range) {
        if (ref.concrete) {
            if (ref.value < 1 || ref.value > range)
                invalid(ref.tok, "multiplet component out of range (components are 1-based)");
            return Index::internal_c(static_cast<std::int32_t>(ref.value),
                                     static_cast<std::uint16_t>(range));
        }
        return Index::internal(ref.name, static_cast<std::uint16_t>(range));
    }

    ExprPtr parse_primary() {
        if (tok.type == Tok::Int) {
            std::int64_t v = tok.value;
            bump();
            return make_number(v);
        }
        if (at_sym('(')) {
            bump();
            ExprPtr e = parse_expr();
            expect_sym(')', "to close the parenthesis");
            return e;
        }
        if (tok.type != Tok::Ident)
            fail(tok, "expected an expression", {"identifier", "number", "'('"});

        Token at = tok;
        std::string word = tok.text;
        bump();

        if (word == "exp") {
            expect_sym('(', "after exp");
            ExprPtr arg = parse_expr();
            expect_sym(')', "to close exp");
            return make_exp(arg);
        }
        if (word == "d") {
            expect_sym('(', "after d");
            ExprPtr inner = parse_expr();
            expect_sym(',', "between expression and index");
            Index mu = spacetime_index(parse_index_ref());
            expect_sym(')', "to close d");
            // Applied right away; the tree stores derivative atoms only.
            return spacetime_derivative_raw(inner, mu);
        }
        if (word == "g") {
            expect_sym('(', "after g");
            Index a = spacetime_index(parse_index_ref());
            expect_sym(',', "between metric indices");
            Index b = spacetime_index(parse_index_ref());
            expect_sym(')', "to close g");
            return make_metric(a, b);
        }
        if (word == "x") {
            expect_sym('(', "after x");
            Index a = spacetime_index(parse_index_ref());
            expect_sym(')', "to close x");
            return make_coord(a);
        }
        if (word == "eps") {
            expect_sym('(', "after eps");
            IndexRef a = parse_index_ref();
            expect_sym(',', "between eps indices");
            IndexRef b = parse_index_ref();
            expect_sym(')', "to close eps");
            return make_epsilon(internal_index(a, 2), internal_index(b, 2));
        }
        if (word == "kd") {
            expect_sym('(', "after kd");
            IndexRef a = parse_index_ref();
            expect_sym(',', "between kd indices");
            IndexRef b = parse_index_ref();
            expect_sym(')', "to close kd");
            // Kind resolution is deferred; see resolve_delta_kinds.
            Index ia = a.concrete ? Index::spacetime_c(static_cast<std::int32_t>(a.value))
                                  : Index::spacetime(a.name);
            Index ib = b.concrete ? Index::spacetime_c(static_cast<std::int32_t>(b.value))
                                  : Index::spacetime(b.name);
            ia.range = kUnresolvedRange;
            ib.range = kUnresolvedRange;
            return make_delta(ia, ib);
        }
        if (word == "theta") return make_arbfn("theta");
        if (word == "eps0") return make_param("eps0");

        if (const FieldDecl* decl = model.find_field(word)) {
            if (at_sym('[')) {
                bump();
                IndexRef ref = parse_index_ref();
                expect_sym(']', "after field index");
                if (decl->kind == FieldKind::Scalar)
                    invalid(at, "scalar field '" + word + "' takes no index");
                Index idx = decl->kind == FieldKind::Vector
                                ? spacetime_index(ref)
                                : internal_index(ref, decl->multiplet_size);
                return make_field(word, {idx});
            }
            if (decl->kind != FieldKind::Scalar)
                invalid(at, "field '" + word + "' needs a component index");
            return make_field(word);
        }
        if (model.has_param(word)) return make_param(word);
        invalid(at, "unknown identifier '" + word + "'");
    }

    // The d() form must work on raw subtrees (which may contain unresolved
    // kd atoms), so the chain rule is applied structurally here rather than
    // through the canonicalizing spacetime_derivative entry point.
    ExprPtr spacetime_derivative_raw(const ExprPtr& e, const Index& mu) {
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
            case ExprTag::Trig:
                throw ValidationError("trigonometric atoms are not part of the model language");
            case ExprTag::ExpFunc: {
                ExprPtr inner = spacetime_derivative_raw(e->children[0], mu);
                return make_product(Rational(1), {e, inner});
            }
            case ExprTag::Power: {
                ExprPtr inner = spacetime_derivative_raw(e->children[0], mu);
                return make_product(Rational(e->exponent),
                                    {make_power(e->children[0], e->exponent - 1), inner});
            }
            case ExprTag::Product: {
                std::vector<ExprPtr> terms;
                for (size_t k = 0; k < e->children.size(); ++k) {
                    std::vector<ExprPtr> factors;
                    for (size_t j = 0; j < e->children.size(); ++j)
                        factors.push_back(j == k ? spacetime_derivative_raw(e->children[j], mu)
                                                 : e->children[j]);
                    terms.push_back(make_product(e->number, std::move(factors)));
                }
                if (terms.empty()) return zero();
                return make_sum(std::move(terms));
            }
            case ExprTag::Sum: {
                std::vector<ExprPtr> terms;
                for (const auto& c : e->children) terms.push_back(spacetime_derivative_raw(c, mu));
                if (terms.empty()) return zero();
                return make_sum(std::move(terms));
            }
        }
        return zero();
    }

    // ----- kd kind resolution -------------------------------------------

    struct KindInfo {
        IndexKind kind;
        std::uint16_t range;
    };

    ExprPtr resolve_delta_kinds(const ExprPtr& e, const std::optional<Index>& header_index) {
        bool any = false;
        for_each_atom(e, [&](const Expr& a) {
            if (a.tag == ExprTag::Delta && a.components[0].range == kUnresolvedRange) any = true;
        });
        if (!any) return e;

        std::map<std::string, KindInfo> evidence;
        if (header_index && !header_index->is_concrete())
            evidence[header_index->name] = {header_index->kind, header_index->range};
        for_each_atom(e, [&](const Expr& a) {
            if (a.tag == ExprTag::Delta && a.components[0].range == kUnresolvedRange) return;
            auto record = [&](const Index& idx) {
                if (!idx.is_concrete()) evidence[idx.name] = {idx.kind, idx.range};
            };
            for (const auto& idx : a.components) record(idx);
            for (const auto& idx : a.derivs) record(idx);
        });

        // Propagate through chained kd atoms until stable.
        for (int round = 0; round < 8; ++round) {
            bool changed = false;
            for_each_atom(e, [&](const Expr& a) {
                if (a.tag != ExprTag::Delta || a.components[0].range != kUnresolvedRange) return;
                const Index &ia = a.components[0], &ib = a.components[1];
                std::optional<KindInfo> known;
                if (!ia.is_concrete() && evidence.count(ia.name)) known = evidence[ia.name];
                if (!ib.is_concrete() && evidence.count(ib.name)) known = evidence[ib.name];
                if (!known) return;
                if (!ia.is_concrete() && !evidence.count(ia.name)) {
                    evidence[ia.name] = *known;
                    changed = true;
                }
                if (!ib.is_concrete() && !evidence.count(ib.name)) {
                    evidence[ib.name] = *known;
                    changed = true;
                }
            });
            if (!changed) break;
        }

        std::function<ExprPtr(const ExprPtr&)> rebuild = [&](const ExprPtr& n) -> ExprPtr {
            if (n->tag == ExprTag::Delta && n->components[0].range == kUnresolvedRange) {
                std::optional<KindInfo> info;
                for (const auto& idx : n->components)
                    if (!idx.is_concrete() && evidence.count(idx.name)) info = evidence[idx.name];
                if (!info)
                    throw ValidationError("cannot infer the index kind of kd(" +
                                          n->components[0].str() + "," +
                                          n->components[1].str() + ")");
                auto fix = [&](const Index& idx) {
                    if (idx.is_concrete()) {
                        return info->kind == IndexKind::Spacetime
                                   ? Index::spacetime_c(idx.concrete)
                                   : Index::internal_c(idx.concrete, info->range);
                    }
                    return info->kind == IndexKind::Spacetime ? Index::spacetime(idx.name)
                                                              : Index::internal(idx.name, info->range);
                };
                return make_delta(fix(n->components[0]), fix(n->components[1]));
            }
            if (n->children.empty()) return n;
            auto copy = std::make_shared<Expr>(*n);
            std::vector<ExprPtr> children;
            children.reserve(n->children.size());
            for (const auto& c : n->children) children.push_back(rebuild(c));
            copy->children = std::move(children);
            return copy;
        };
        return rebuild(e);
    }
};

}  // namespace

ModelDef parse_model(const std::string& text) {
    Parser p(text);
    return p.parse();
}

ParseOutcome try_parse_model(const std::string& text) noexcept {
    ParseOutcome out;
    try {
        out.model = parse_model(text);
    } catch (const ParseFailure& f) {
        out.syntax_error = f.error();
    } catch (const std::exception& e) {
        out.validation_error = e.what();
    }
    return out;
}

ExprPtr parse_expression(const std::string& text, const ModelDef& model) {
    Parser p(text);
    p.model = model;
    ExprPtr e = p.parse_expression_resolved(std::nullopt);
    if (p.tok.type != Tok::End) fail(p.tok, "trailing input after expression");
    return canonicalize(e, model.space);
}

ModelDef load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io-error", "cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

}  // namespace fieldsym
