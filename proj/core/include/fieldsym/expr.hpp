#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fieldsym/index.hpp"
#include "fieldsym/rational.hpp"

namespace fieldsym {

enum class MetricSignature : std::uint8_t { MostlyMinus, MostlyPlus };

/// Flat-spacetime context: dimension and diagonal metric signature.
struct Space {
    int dimension = 4;
    MetricSignature signature = MetricSignature::MostlyMinus;

    /// Diagonal metric entry g^{mu mu} (no sum), +-1.
    int metric_entry(int mu) const {
        bool first = (mu == 0);
        if (signature == MetricSignature::MostlyMinus) return first ? 1 : -1;
        return first ? -1 : 1;
    }
    /// Trace of the diagonal signature matrix, sum_mu g^{mu mu}.
    int signature_trace() const {
        int s = 0;
        for (int mu = 0; mu < dimension; ++mu) s += metric_entry(mu);
        return s;
    }
    friend bool operator==(const Space& a, const Space& b) {
        return a.dimension == b.dimension && a.signature == b.signature;
    }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprTag : std::uint8_t {
    Number,    // exact rational
    Param,     // named constant
    Coord,     // spacetime coordinate x^mu
    Field,     // field component, possibly with spacetime-derivative multiset
    ArbFn,     // arbitrary scalar function of position (gauge parameter), with derivatives
    Metric,    // diagonal constant metric, two spacetime indices
    Epsilon,   // antisymmetric symbol, two internal indices of a 2-component multiplet
    Delta,     // Kronecker delta, two indices of equal kind
    Trig,      // cos/sin of a scalar field (polar-rewrite sandbox only)
    ExpFunc,   // exponential of an index-free scalar expression
    Power,     // integer power of an index-free base
    Product,   // rational coefficient times factor list
    Sum,       // term list
};

enum class TrigKind : std::uint8_t { Cos, Sin };

/// Immutable symbolic expression node. Construct through the builder
/// functions below; nodes are shared and never mutated after creation.
struct Expr {
    ExprTag tag;

    Rational number;                 // Number; Product coefficient
    std::string name;                // Param / Field / ArbFn / Trig argument field
    std::vector<Index> components;   // Field component slots; Coord/Metric/Epsilon/Delta slots
    std::vector<Index> derivs;       // Field / ArbFn spacetime-derivative multiset (sorted)
    TrigKind trig = TrigKind::Cos;   // Trig
    int exponent = 0;                // Power
    std::vector<ExprPtr> children;   // Sum terms / Product factors / Power base / ExpFunc arg

    explicit Expr(ExprTag t) : tag(t) {}
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

ExprPtr make_number(Rational value);
inline ExprPtr make_number(std::int64_t n, std::int64_t d = 1) { return make_number(Rational(n, d)); }
ExprPtr make_param(std::string name);
ExprPtr make_coord(Index spacetime_index);
ExprPtr make_field(std::string name, std::vector<Index> components = {},
                   std::vector<Index> derivs = {});
ExprPtr make_arbfn(std::string name, std::vector<Index> derivs = {});
ExprPtr make_metric(Index a, Index b);
ExprPtr make_epsilon(Index a, Index b);
ExprPtr make_delta(Index a, Index b);
ExprPtr make_trig(TrigKind kind, std::string field_name);
ExprPtr make_exp(ExprPtr arg);
ExprPtr make_power(ExprPtr base, int exponent);
ExprPtr make_product(Rational coeff, std::vector<ExprPtr> factors);
ExprPtr make_sum(std::vector<ExprPtr> terms);

ExprPtr zero();
ExprPtr one();

// Convenience arithmetic (not canonicalized; canonicalize when it matters).
ExprPtr operator+(const ExprPtr& a, const ExprPtr& b);
ExprPtr operator-(const ExprPtr& a, const ExprPtr& b);
ExprPtr operator*(const ExprPtr& a, const ExprPtr& b);
ExprPtr operator-(const ExprPtr& a);
ExprPtr operator*(const Rational& c, const ExprPtr& a);

// ---------------------------------------------------------------------------
// Structural queries
// ---------------------------------------------------------------------------

/// Total order used for canonical sorting; compares structure, not value.
int compare(const Expr& a, const Expr& b);
inline int compare(const ExprPtr& a, const ExprPtr& b) { return compare(*a, *b); }
bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

bool is_zero(const ExprPtr& e);
bool is_number(const ExprPtr& e);

/// Debug rendering (not the DSL printer; see printer.hpp for that).
std::string debug_string(const ExprPtr& e);

}  // namespace fieldsym
