#include "fieldsym/canon.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>

#include "fieldsym/errors.hpp"

namespace fieldsym {

namespace {

// Raw product term while normalizing: coefficient and flat factor list.
struct RawTerm {
    Rational coeff{1};
    std::vector<ExprPtr> factors;
};

using IndexKey = std::pair<IndexKind, std::string>;

IndexKey key_of(const Index& idx) { return {idx.kind, idx.name}; }

bool factor_has_symbolic_index(const Expr& f) {
    for (const auto& idx : f.components)
        if (!idx.is_concrete()) return true;
    for (const auto& idx : f.derivs)
        if (!idx.is_concrete()) return true;
    return false;
}

bool is_atom_tag(ExprTag t) {
    switch (t) {
        case ExprTag::Param:
        case ExprTag::Coord:
        case ExprTag::Field:
        case ExprTag::ArbFn:
        case ExprTag::Metric:
        case ExprTag::Epsilon:
        case ExprTag::Delta:
        case ExprTag::Trig:
            return true;
        default:
            return false;
    }
}

// An index-free factor that Power may wrap (all-concrete slots count as free).
bool factor_power_mergeable(const ExprPtr& f) {
    if (f->tag == ExprTag::Power || f->tag == ExprTag::Sum || f->tag == ExprTag::Product)
        return false;
    if (f->tag == ExprTag::Number) return false;
    return !factor_has_symbolic_index(*f);
}

bool factor_invertible(const ExprPtr& f) {
    // Factors whose negative powers are representable exactly.
    switch (f->tag) {
        case ExprTag::Param:
        case ExprTag::ExpFunc:
        case ExprTag::Trig:
            return true;
        case ExprTag::Field:
            return !factor_has_symbolic_index(*f) && f->derivs.empty();
        default:
            return false;
    }
}

void check_index_free(const ExprPtr& e, const char* what) {
    bool found = false;
    for_each_atom(e, [&](const Expr& a) {
        if (factor_has_symbolic_index(a)) found = true;
    });
    if (found) throw ValidationError(std::string(what) + " must not carry symbolic indices");
}

// ---------------------------------------------------------------------------
// Expansion to raw terms
// ---------------------------------------------------------------------------

struct Expander {
    const Space& space;
    int fresh_counter = 0;

    // Rename the indices contracted *within* one raw term to fresh reserved
    // names, so that multiplying expression copies (powers, products of
    // sums) never collides dummy names.
    RawTerm freshen_private_dummies(RawTerm t) {
        std::map<IndexKey, int> counts;
        for (const auto& f : t.factors) {
            for (const auto& idx : f->components)
                if (!idx.is_concrete()) counts[key_of(idx)]++;
            for (const auto& idx : f->derivs)
                if (!idx.is_concrete()) counts[key_of(idx)]++;
        }
        std::map<IndexKey, std::string> renames;
        for (const auto& [key, n] : counts)
            if (n == 2) renames[key] = ".p" + std::to_string(fresh_counter++);
        if (renames.empty()) return t;
        for (auto& f : t.factors) {
            auto copy = std::make_shared<Expr>(*f);
            bool changed = false;
            auto map_index = [&](Index& idx) {
                if (idx.is_concrete()) return;
                auto it = renames.find(key_of(idx));
                if (it != renames.end()) {
                    idx.name = it->second;
                    changed = true;
                }
            };
            for (auto& idx : copy->components) map_index(idx);
            for (auto& idx : copy->derivs) map_index(idx);
            if (changed) f = copy;
        }
        return t;
    }

    std::vector<RawTerm> expand(const ExprPtr& e) {
        switch (e->tag) {
            case ExprTag::Number: {
                if (e->number.is_zero()) return {};
                RawTerm t;
                t.coeff = e->number;
                return {t};
            }
            case ExprTag::Sum: {
                std::vector<RawTerm> out;
                for (const auto& c : e->children) {
                    auto sub = expand(c);
                    out.insert(out.end(), sub.begin(), sub.end());
                }
                return out;
            }
            case ExprTag::Product: {
                std::vector<RawTerm> acc;
                RawTerm unit;
                unit.coeff = e->number;
                acc.push_back(unit);
                if (e->number.is_zero()) return {};
                for (const auto& c : e->children) {
                    auto rhs = expand(c);
                    for (auto& t : rhs) t = freshen_private_dummies(std::move(t));
                    std::vector<RawTerm> next;
                    next.reserve(acc.size() * rhs.size());
                    for (const auto& a : acc)
                        for (const auto& b : rhs) {
                            RawTerm t;
                            t.coeff = a.coeff * b.coeff;
                            t.factors = a.factors;
                            t.factors.insert(t.factors.end(), b.factors.begin(), b.factors.end());
                            next.push_back(std::move(t));
                        }
                    acc = std::move(next);
                }
                return acc;
            }
            case ExprTag::Power:
                return expand_power(e->children[0], e->exponent);
            case ExprTag::ExpFunc: {
                ExprPtr arg = canonicalize(e->children[0], space);
                check_index_free(arg, "exp argument");
                if (is_zero(arg)) return expand(one());
                RawTerm t;
                t.factors = {make_exp(arg)};
                return {t};
            }
            default: {
                RawTerm t;
                t.factors = {e};
                return {t};
            }
        }
    }

    std::vector<RawTerm> expand_power(const ExprPtr& base, int n) {
        if (n == 0) return expand(one());
        auto terms = expand(base);
        if (n < 0) {
            if (terms.size() != 1)
                throw ValidationError("negative power of a non-monomial expression");
            const RawTerm& t = terms[0];
            if (t.coeff.is_zero()) throw ValidationError("negative power of zero");
            RawTerm inv;
            inv.coeff = t.coeff.pow(n);
            for (const auto& f : t.factors) {
                if (f->tag == ExprTag::Power) {
                    inv.factors.push_back(make_power(f->children[0], f->exponent * n));
                } else if (factor_invertible(f)) {
                    if (f->tag == ExprTag::ExpFunc)
                        inv.factors.push_back(make_exp(make_product(Rational(n), {f->children[0]})));
                    else
                        inv.factors.push_back(make_power(f, n));
                } else {
                    throw ValidationError("negative power of a non-invertible factor");
                }
            }
            return {inv};
        }
        // Positive power: repeated multiplication keeps index slots explicit.
        std::vector<RawTerm> acc = expand(one());
        for (int k = 0; k < n; ++k) {
            std::vector<RawTerm> next;
            for (const auto& a : acc)
                for (const auto& b : terms) {
                    RawTerm copy = freshen_private_dummies(b);
                    RawTerm t;
                    t.coeff = a.coeff * copy.coeff;
                    t.factors = a.factors;
                    t.factors.insert(t.factors.end(), copy.factors.begin(), copy.factors.end());
                    next.push_back(std::move(t));
                }
            acc = std::move(next);
        }
        return acc;
    }
};

// ---------------------------------------------------------------------------
// Per-term structural rules (contractions, expansions); may split terms
// ---------------------------------------------------------------------------

// Occurrence of a symbolic index: factor position and slot.
struct SlotLoc {
    size_t factor;
    bool in_derivs;
    size_t pos;
};

std::map<IndexKey, std::vector<SlotLoc>> symbolic_occurrences(const std::vector<ExprPtr>& fs) {
    std::map<IndexKey, std::vector<SlotLoc>> occ;
    for (size_t i = 0; i < fs.size(); ++i) {
        const Expr& f = *fs[i];
        for (size_t p = 0; p < f.components.size(); ++p)
            if (!f.components[p].is_concrete())
                occ[key_of(f.components[p])].push_back({i, false, p});
        for (size_t p = 0; p < f.derivs.size(); ++p)
            if (!f.derivs[p].is_concrete())
                occ[key_of(f.derivs[p])].push_back({i, true, p});
    }
    return occ;
}

Index& slot_at(Expr& f, const SlotLoc& loc) {
    return loc.in_derivs ? f.derivs[loc.pos] : f.components[loc.pos];
}

ExprPtr clone_expr(const Expr& f) { return std::make_shared<Expr>(f); }

// Replace one slot of a factor, returning the new factor.
ExprPtr with_slot(const ExprPtr& f, const SlotLoc& loc, const Index& idx) {
    auto copy = clone_expr(*f);
    slot_at(const_cast<Expr&>(*copy), loc) = idx;
    if (loc.in_derivs) {
        auto& ds = const_cast<Expr&>(*copy).derivs;
        std::sort(ds.begin(), ds.end());
    }
    return copy;
}

int epsilon_value(int a, int b) {
    if (a == b) return 0;
    return (a == 1 && b == 2) ? 1 : -1;
}

struct TermNormalizer {
    const Space& space;
    std::vector<RawTerm> output;

    void run(RawTerm term) {
        std::deque<RawTerm> queue;
        queue.push_back(std::move(term));
        while (!queue.empty()) {
            RawTerm t = std::move(queue.front());
            queue.pop_front();
            if (t.coeff.is_zero()) continue;
            if (step(t, queue)) continue;  // the step re-queued replacements
            output.push_back(std::move(t));
        }
    }

    // Applies one rewrite if possible; returns true when the term was
    // replaced (requeued), false when it is structurally settled.
    bool step(RawTerm& t, std::deque<RawTerm>& queue) {
        // Atom-local resolutions first.
        for (size_t i = 0; i < t.factors.size(); ++i) {
            const Expr& f = *t.factors[i];
            if (f.tag == ExprTag::Metric) {
                const Index &a = f.components[0], &b = f.components[1];
                if (a.is_concrete() && b.is_concrete()) {
                    t.coeff *= Rational(a.concrete == b.concrete ? space.metric_entry(a.concrete) : 0);
                    t.factors.erase(t.factors.begin() + i);
                    queue.push_back(std::move(t));
                    return true;
                }
                if (!a.is_concrete() && a == b) {  // self-contraction
                    t.coeff *= Rational(space.signature_trace());
                    t.factors.erase(t.factors.begin() + i);
                    queue.push_back(std::move(t));
                    return true;
                }
            } else if (f.tag == ExprTag::Delta) {
                const Index &a = f.components[0], &b = f.components[1];
                if (a.is_concrete() && b.is_concrete()) {
                    t.coeff *= Rational(a.concrete == b.concrete ? 1 : 0);
                    t.factors.erase(t.factors.begin() + i);
                    queue.push_back(std::move(t));
                    return true;
                }
                if (!a.is_concrete() && a == b) {
                    int range = a.kind == IndexKind::Spacetime ? space.dimension : a.range;
                    t.coeff *= Rational(range);
                    t.factors.erase(t.factors.begin() + i);
                    queue.push_back(std::move(t));
                    return true;
                }
            } else if (f.tag == ExprTag::Epsilon) {
                const Index &a = f.components[0], &b = f.components[1];
                if (a.is_concrete() && b.is_concrete()) {
                    t.coeff *= Rational(epsilon_value(a.concrete, b.concrete));
                    t.factors.erase(t.factors.begin() + i);
                    queue.push_back(std::move(t));
                    return true;
                }
                if (!a.is_concrete() && a == b) {
                    t.coeff = Rational(0);
                    queue.push_back(std::move(t));
                    return true;
                }
            }
        }

        auto occ = symbolic_occurrences(t.factors);

        // Index sanity: a name may not mix kinds or multiplet ranges.
        std::map<std::string, IndexKind> kind_seen;
        for (const auto& [key, locs] : occ) {
            auto it = kind_seen.find(key.second);
            if (it != kind_seen.end() && it->second != key.first)
                throw IndexViolation("index '" + key.second + "' used with two different kinds");
            kind_seen.emplace(key.second, key.first);
            if (key.first == IndexKind::Internal) {
                std::uint16_t range = 0;
                for (const auto& loc : locs) {
                    const Expr& f = *t.factors[loc.factor];
                    const Index& idx = loc.in_derivs ? f.derivs[loc.pos] : f.components[loc.pos];
                    if (range == 0) range = idx.range;
                    if (idx.range != range)
                        throw IndexViolation("index '" + key.second +
                                             "' contracts multiplets of different size");
                }
            }
        }

        // Contract deltas / metrics / epsilons that share a dummy with
        // another slot.
        for (size_t i = 0; i < t.factors.size(); ++i) {
            const Expr& f = *t.factors[i];
            if (f.tag != ExprTag::Delta && f.tag != ExprTag::Metric && f.tag != ExprTag::Epsilon)
                continue;
            for (int slot = 0; slot < 2; ++slot) {
                const Index& idx = f.components[slot];
                if (idx.is_concrete()) continue;
                const auto& locs = occ[key_of(idx)];
                if (locs.size() != 2) continue;  // free or violating; handled later
                // Find the partner occurrence (not this slot).
                SlotLoc partner{};
                bool found = false;
                for (const auto& loc : locs) {
                    if (loc.factor == i && !loc.in_derivs && loc.pos == static_cast<size_t>(slot))
                        continue;
                    partner = loc;
                    found = true;
                }
                if (!found || partner.factor == i) continue;  // self pair handled above
                const Index& other = f.components[1 - slot];

                if (f.tag == ExprTag::Delta) {
                    t.factors[partner.factor] = with_slot(t.factors[partner.factor], partner, other);
                    t.factors.erase(t.factors.begin() + i);
                    queue.push_back(std::move(t));
                    return true;
                }
                if (f.tag == ExprTag::Metric) {
                    const Expr& pf = *t.factors[partner.factor];
                    if (pf.tag == ExprTag::Metric && !partner.in_derivs) {
                        // g(mu,nu) g(nu,la) -> kd(mu,la): diagonal +-1 squares to 1.
                        const Index& far = pf.components[1 - partner.pos];
                        ExprPtr kd = make_delta(other, far);
                        size_t hi = std::max(i, partner.factor), lo = std::min(i, partner.factor);
                        t.factors.erase(t.factors.begin() + hi);
                        t.factors.erase(t.factors.begin() + lo);
                        t.factors.push_back(kd);
                        queue.push_back(std::move(t));
                        return true;
                    }
                    if (other.is_concrete()) {
                        // Diagonal metric: g(c, mu) T(mu) = g^{cc} T(c).
                        t.coeff *= Rational(space.metric_entry(other.concrete));
                        t.factors[partner.factor] =
                            with_slot(t.factors[partner.factor], partner, other);
                        t.factors.erase(t.factors.begin() + i);
                        queue.push_back(std::move(t));
                        return true;
                    }
                }
                if (f.tag == ExprTag::Epsilon && other.is_concrete()) {
                    int comp = other.concrete == 1 ? 2 : 1;
                    int value = slot == 0 ? epsilon_value(comp, other.concrete)
                                          : epsilon_value(other.concrete, comp);
                    Index replacement = Index::internal_c(comp, idx.range);
                    t.coeff *= Rational(value);
                    t.factors[partner.factor] =
                        with_slot(t.factors[partner.factor], partner, replacement);
                    t.factors.erase(t.factors.begin() + i);
                    queue.push_back(std::move(t));
                    return true;
                }
            }
        }

        // Epsilon pair expansion: eps(a,b) eps(c,d) = kd(a,c) kd(b,d) - kd(a,d) kd(b,c).
        std::vector<size_t> eps;
        for (size_t i = 0; i < t.factors.size(); ++i)
            if (t.factors[i]->tag == ExprTag::Epsilon) eps.push_back(i);
        if (eps.size() >= 2) {
            const Expr& e1 = *t.factors[eps[0]];
            const Expr& e2 = *t.factors[eps[1]];
            Index a = e1.components[0], b = e1.components[1];
            Index c = e2.components[0], d = e2.components[1];
            std::vector<ExprPtr> rest;
            for (size_t i = 0; i < t.factors.size(); ++i)
                if (i != eps[0] && i != eps[1]) rest.push_back(t.factors[i]);
            RawTerm t1;
            t1.coeff = t.coeff;
            t1.factors = rest;
            t1.factors.push_back(make_delta(a, c));
            t1.factors.push_back(make_delta(b, d));
            RawTerm t2;
            t2.coeff = -t.coeff;
            t2.factors = std::move(rest);
            t2.factors.push_back(make_delta(a, d));
            t2.factors.push_back(make_delta(b, c));
            queue.push_back(std::move(t1));
            queue.push_back(std::move(t2));
            return true;
        }

        // cos^2 -> 1 - sin^2 (normal form keeps cosine degree <= 1).
        for (size_t i = 0; i < t.factors.size(); ++i) {
            const Expr& f = *t.factors[i];
            const bool cos_pow = f.tag == ExprTag::Power &&
                                 f.children[0]->tag == ExprTag::Trig &&
                                 f.children[0]->trig == TrigKind::Cos && f.exponent >= 2;
            if (!cos_pow) continue;
            const std::string& fld = f.children[0]->name;
            int rem = f.exponent - 2;
            std::vector<ExprPtr> rest;
            for (size_t k = 0; k < t.factors.size(); ++k)
                if (k != i) rest.push_back(t.factors[k]);
            if (rem > 0) rest.push_back(make_power(make_trig(TrigKind::Cos, fld), rem));
            RawTerm t1;  // +1
            t1.coeff = t.coeff;
            t1.factors = rest;
            RawTerm t2;  // -sin^2
            t2.coeff = -t.coeff;
            t2.factors = std::move(rest);
            t2.factors.push_back(make_power(make_trig(TrigKind::Sin, fld), 2));
            queue.push_back(std::move(t1));
            queue.push_back(std::move(t2));
            return true;
        }

        // Merge duplicate cos factors into powers so the rule above fires.
        // (Power merging proper happens in assemble(), but cos*cos must be
        // reduced before dummy renaming.)
        std::map<std::string, int> cos_count;
        for (const auto& f : t.factors) {
            if (f->tag == ExprTag::Trig && f->trig == TrigKind::Cos) cos_count[f->name]++;
            if (f->tag == ExprTag::Power && f->children[0]->tag == ExprTag::Trig &&
                f->children[0]->trig == TrigKind::Cos)
                cos_count[f->children[0]->name] += f->exponent;
        }
        for (const auto& [fld, count] : cos_count) {
            if (count < 2) continue;
            std::vector<ExprPtr> rest;
            for (const auto& f : t.factors) {
                bool is_this_cos =
                    (f->tag == ExprTag::Trig && f->trig == TrigKind::Cos && f->name == fld) ||
                    (f->tag == ExprTag::Power && f->children[0]->tag == ExprTag::Trig &&
                     f->children[0]->trig == TrigKind::Cos && f->children[0]->name == fld);
                if (!is_this_cos) rest.push_back(f);
            }
            rest.push_back(make_power(make_trig(TrigKind::Cos, fld), count));
            t.factors = std::move(rest);
            queue.push_back(std::move(t));
            return true;
        }

        return false;
    }
};

// ---------------------------------------------------------------------------
// Canonical dummy renaming
// ---------------------------------------------------------------------------

constexpr const char* kSentinelName = "\x7f?";

// Renames the symbolic indices of one factor according to `assign`
// (unassigned dummies become a sentinel that sorts last), then normalizes
// symmetric/antisymmetric slots. Returns the normalized factor and the sign.
std::pair<ExprPtr, int> render_factor(const ExprPtr& f,
                                      const std::map<IndexKey, std::string>& assign,
                                      const std::set<IndexKey>& dummies) {
    auto copy = clone_expr(*f);
    auto& e = const_cast<Expr&>(*copy);
    auto map_index = [&](Index& idx) {
        if (idx.is_concrete()) return;
        auto key = key_of(idx);
        if (!dummies.count(key)) return;  // free index: keep the name
        auto it = assign.find(key);
        idx.name = it != assign.end() ? it->second : kSentinelName;
    };
    for (auto& idx : e.components) map_index(idx);
    for (auto& idx : e.derivs) map_index(idx);

    int sign = 1;
    if (e.tag == ExprTag::Metric || e.tag == ExprTag::Delta) {
        if (e.components[1] < e.components[0]) std::swap(e.components[0], e.components[1]);
    } else if (e.tag == ExprTag::Epsilon) {
        if (e.components[1] < e.components[0]) {
            std::swap(e.components[0], e.components[1]);
            sign = -1;
        }
    }
    std::sort(e.derivs.begin(), e.derivs.end());
    return {copy, sign};
}

int compare_factor_lists(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = 0; i < a.size(); ++i)
        if (int c = compare(a[i], b[i]); c != 0) return c;
    return 0;
}

struct DummyRenamer {
    const std::vector<ExprPtr>& factors;
    std::set<IndexKey> dummies;
    int explored = 0;

    std::optional<std::vector<ExprPtr>> best;
    int best_sign = 1;
    bool sign_ambiguous = false;

    std::map<IndexKey, std::string> assign;
    int next_spacetime = 0;
    int next_internal = 0;

    static constexpr int kBudget = 20000;

    explicit DummyRenamer(const std::vector<ExprPtr>& fs) : factors(fs) {}

    // Distinct unassigned dummy keys of a factor, in slot order.
    std::vector<IndexKey> unassigned_of(const Expr& f) const {
        std::vector<IndexKey> out;
        auto consider = [&](const Index& idx) {
            if (idx.is_concrete()) return;
            auto key = key_of(idx);
            if (!dummies.count(key) || assign.count(key)) return;
            if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
        };
        for (const auto& idx : f.components) consider(idx);
        for (const auto& idx : f.derivs) consider(idx);
        return out;
    }

    void search(std::vector<char>& placed, int placed_count, int sign_so_far) {
        if (explored > kBudget)
            throw Error("canon-budget", "canonical renaming search exceeded its budget");
        if (placed_count == static_cast<int>(factors.size())) {
            ++explored;
            std::vector<ExprPtr> rendered;
            rendered.reserve(factors.size());
            int sign = 1;
            for (const auto& f : factors) {
                auto [node, s] = render_factor(f, assign, dummies);
                rendered.push_back(node);
                sign *= s;
            }
            std::sort(rendered.begin(), rendered.end(),
                      [](const ExprPtr& a, const ExprPtr& b) { return compare(a, b) < 0; });
            sign *= sign_so_far;
            if (!best) {
                best = rendered;
                best_sign = sign;
                return;
            }
            int c = compare_factor_lists(rendered, *best);
            if (c < 0) {
                best = rendered;
                best_sign = sign;
                sign_ambiguous = false;
            } else if (c == 0 && sign != best_sign) {
                sign_ambiguous = true;
            }
            return;
        }

        // Choose the unplaced factor(s) with the minimal provisional render.
        std::optional<ExprPtr> min_render;
        std::vector<size_t> ties;
        for (size_t i = 0; i < factors.size(); ++i) {
            if (placed[i]) continue;
            auto [node, s] = render_factor(factors[i], assign, dummies);
            (void)s;
            if (!min_render || compare(node, *min_render) < 0) {
                min_render = node;
                ties = {i};
            } else if (compare(node, *min_render) == 0) {
                ties.push_back(i);
            }
        }

        std::set<std::string> branch_fingerprints;
        for (size_t idx : ties) {
            auto keys = unassigned_of(*factors[idx]);
            // Branch over the orderings in which fresh canonical names are
            // handed to this factor's unassigned dummies.
            std::vector<size_t> perm(keys.size());
            for (size_t k = 0; k < keys.size(); ++k) perm[k] = k;
            std::sort(perm.begin(), perm.end());
            do {
                auto saved_assign = assign;
                int saved_st = next_spacetime, saved_in = next_internal;
                for (size_t k : perm) {
                    const IndexKey& key = keys[k];
                    std::string fresh = key.first == IndexKind::Spacetime
                                            ? ".s" + std::to_string(next_spacetime++)
                                            : ".i" + std::to_string(next_internal++);
                    assign[key] = fresh;
                }
                // Dedupe branches that render identically and whose new
                // dummies connect to identically-rendered partner slots.
                auto [node, s] = render_factor(factors[idx], assign, dummies);
                std::string fp = debug_string(node);
                for (size_t k : perm) {
                    const IndexKey& key = keys[k];
                    fp += "|" + partner_fingerprint(idx, key);
                }
                if (branch_fingerprints.insert(fp).second) {
                    placed[idx] = 1;
                    search(placed, placed_count + 1, sign_so_far);
                    placed[idx] = 0;
                }
                (void)s;
                assign = std::move(saved_assign);
                next_spacetime = saved_st;
                next_internal = saved_in;
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
    }

    std::string partner_fingerprint(size_t factor_idx, const IndexKey& key) const {
        for (size_t i = 0; i < factors.size(); ++i) {
            if (i == factor_idx) continue;
            const Expr& f = *factors[i];
            auto scan = [&](const std::vector<Index>& slots, const char* tagc) -> std::string {
                for (size_t p = 0; p < slots.size(); ++p) {
                    if (!slots[p].is_concrete() && key_of(slots[p]) == key) {
                        auto [node, s] = render_factor(factors[i], assign, dummies);
                        (void)s;
                        return debug_string(node) + tagc + std::to_string(p);
                    }
                }
                return {};
            };
            std::string r = scan(f.components, "c");
            if (!r.empty()) return r;
            r = scan(f.derivs, "d");
            if (!r.empty()) return r;
        }
        return "self";
    }
};

// Renames the dummies of a settled term to the canonical sequence; detects
// terms that vanish because an antisymmetric factor meets a symmetric
// contraction. Returns false when the term is zero.
bool canonical_rename(RawTerm& t, const Space& space) {
    (void)space;
    auto occ = symbolic_occurrences(t.factors);
    std::set<IndexKey> dummies;
    for (const auto& [key, locs] : occ) {
        if (locs.size() > 2)
            throw IndexViolation("index '" + key.second + "' appears more than twice in a term");
        if (locs.size() == 2) dummies.insert(key);
    }
    DummyRenamer renamer(t.factors);
    renamer.dummies = std::move(dummies);
    std::vector<char> placed(t.factors.size(), 0);
    renamer.search(placed, 0, 1);
    if (!renamer.best) {  // no factors
        return !t.coeff.is_zero();
    }
    if (renamer.sign_ambiguous) return false;  // antisymmetric * symmetric = 0
    t.factors = std::move(*renamer.best);
    t.coeff *= Rational(renamer.best_sign);
    return !t.coeff.is_zero();
}

// ---------------------------------------------------------------------------
// Final assembly
// ---------------------------------------------------------------------------

// Merge duplicate index-free factors into powers; drop x^0; x^1 -> x.
void merge_powers(RawTerm& t) {
    std::vector<std::pair<ExprPtr, int>> merged;  // base, exponent
    std::vector<ExprPtr> passthrough;
    std::vector<ExprPtr> exp_args;
    for (const auto& f : t.factors) {
        ExprPtr base = f;
        int exponent = 1;
        if (f->tag == ExprTag::Power) {
            base = f->children[0];
            exponent = f->exponent;
        }
        if (base->tag == ExprTag::ExpFunc) {
            exp_args.push_back(exponent == 1
                                   ? base->children[0]
                                   : make_product(Rational(exponent), {base->children[0]}));
            continue;
        }
        if (!factor_power_mergeable(base)) {
            passthrough.push_back(f);
            continue;
        }
        if (base->tag == ExprTag::Number) {
            t.coeff *= base->number.pow(exponent);
            continue;
        }
        bool found = false;
        for (auto& [b, e] : merged) {
            if (structurally_equal(b, base)) {
                e += exponent;
                found = true;
                break;
            }
        }
        if (!found) merged.emplace_back(base, exponent);
    }
    t.factors = std::move(passthrough);
    for (const auto& [b, e] : merged) {
        if (e == 0) continue;
        t.factors.push_back(e == 1 ? b : make_power(b, e));
    }
    if (!exp_args.empty()) {
        ExprPtr arg = canonicalize(make_sum(std::move(exp_args)), Space{});
        if (!is_zero(arg)) t.factors.push_back(make_exp(arg));
    }
}

struct FreeSignature {
    std::vector<std::tuple<IndexKind, std::string, std::uint16_t>> entries;
    friend bool operator==(const FreeSignature& a, const FreeSignature& b) {
        return a.entries == b.entries;
    }
};

FreeSignature free_signature(const RawTerm& t) {
    auto occ = symbolic_occurrences(t.factors);
    FreeSignature sig;
    for (const auto& [key, locs] : occ) {
        if (locs.size() == 1) {
            const Expr& f = *t.factors[locs[0].factor];
            const Index& idx =
                locs[0].in_derivs ? f.derivs[locs[0].pos] : f.components[locs[0].pos];
            sig.entries.emplace_back(key.first, key.second, idx.range);
        }
    }
    std::sort(sig.entries.begin(), sig.entries.end());
    return sig;
}

ExprPtr assemble_term(const RawTerm& t) {
    if (t.factors.empty()) return make_number(t.coeff);
    if (t.coeff.is_one() && t.factors.size() == 1) return t.factors[0];
    return make_product(t.coeff, t.factors);
}

}  // namespace

ExprPtr canonicalize(const ExprPtr& e, const Space& space) {
    Expander expander{space};
    std::vector<RawTerm> raw = expander.expand(e);

    TermNormalizer normalizer{space, {}};
    for (auto& t : raw) normalizer.run(std::move(t));

    std::vector<RawTerm> settled;
    for (auto& t : normalizer.output) {
        merge_powers(t);
        if (t.coeff.is_zero()) continue;
        if (!canonical_rename(t, space)) continue;
        merge_powers(t);  // renamed list may expose new duplicates
        std::sort(t.factors.begin(), t.factors.end(),
                  [](const ExprPtr& a, const ExprPtr& b) { return compare(a, b) < 0; });
        settled.push_back(std::move(t));
    }

    // Combine like terms.
    std::sort(settled.begin(), settled.end(), [](const RawTerm& a, const RawTerm& b) {
        return compare_factor_lists(a.factors, b.factors) < 0;
    });
    std::vector<RawTerm> combined;
    for (auto& t : settled) {
        if (!combined.empty() && compare_factor_lists(combined.back().factors, t.factors) == 0) {
            combined.back().coeff += t.coeff;
        } else {
            combined.push_back(std::move(t));
        }
    }
    combined.erase(std::remove_if(combined.begin(), combined.end(),
                                  [](const RawTerm& t) { return t.coeff.is_zero(); }),
                   combined.end());

    if (combined.empty()) return zero();

    // Scalar densities and tensors alike: every term must expose the same
    // free indices.
    FreeSignature sig = free_signature(combined.front());
    for (const auto& t : combined) {
        if (!(free_signature(t) == sig))
            throw IndexViolation("terms of a sum carry different free indices");
    }

    if (combined.size() == 1) return assemble_term(combined[0]);
    std::vector<ExprPtr> terms;
    terms.reserve(combined.size());
    for (const auto& t : combined) terms.push_back(assemble_term(t));
    std::sort(terms.begin(), terms.end(),
              [](const ExprPtr& a, const ExprPtr& b) { return compare(a, b) < 0; });
    return make_sum(std::move(terms));
}

bool canonically_equal(const ExprPtr& a, const ExprPtr& b, const Space& space) {
    return structurally_equal(canonicalize(a, space), canonicalize(b, space));
}

std::vector<Term> expr_terms(const ExprPtr& e) {
    std::vector<Term> out;
    auto push_one = [&out](const ExprPtr& n) {
        Term t;
        if (n->tag == ExprTag::Number) {
            t.coeff = n->number;
        } else if (n->tag == ExprTag::Product) {
            t.coeff = n->number;
            t.factors = n->children;
        } else {
            t.coeff = Rational(1);
            t.factors = {n};
        }
        out.push_back(std::move(t));
    };
    if (e->tag == ExprTag::Sum) {
        for (const auto& c : e->children) push_one(c);
    } else if (!is_zero(e)) {
        push_one(e);
    }
    return out;
}

ExprPtr term_to_expr(const Term& t) {
    if (t.factors.empty()) return make_number(t.coeff);
    if (t.coeff.is_one() && t.factors.size() == 1) return t.factors[0];
    return make_product(t.coeff, t.factors);
}

void for_each_atom(const ExprPtr& e, const std::function<void(const Expr&)>& fn) {
    if (is_atom_tag(e->tag) || e->tag == ExprTag::Number) fn(*e);
    for (const auto& c : e->children) for_each_atom(c, fn);
}

std::vector<Index> free_indices(const ExprPtr& e) {
    auto terms = expr_terms(e);
    if (terms.empty()) return {};
    auto occ = symbolic_occurrences(terms[0].factors);
    std::vector<Index> out;
    for (const auto& [key, locs] : occ) {
        if (locs.size() == 1) {
            const Expr& f = *terms[0].factors[locs[0].factor];
            out.push_back(locs[0].in_derivs ? f.derivs[locs[0].pos] : f.components[locs[0].pos]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool is_scalar_expr(const ExprPtr& e) { return free_indices(e).empty(); }

}  // namespace fieldsym
