#pragma once

#include <cstdint>
#include <string>
#include <tuple>

namespace fieldsym {

enum class IndexKind : std::uint8_t { Spacetime, Internal };

/// One tensor index occurrence. Symbolic indices carry a name; concrete
/// indices carry an integer component (0-based for spacetime, 1-based for
/// internal multiplet components). Internal indices also carry the multiplet
/// range; spacetime indices take their range from the model dimension.
struct Index {
    IndexKind kind = IndexKind::Spacetime;
    std::int32_t concrete = -1;  // -1 means symbolic
    std::string name;            // empty when concrete
    std::uint16_t range = 0;     // internal multiplet size; 0 for spacetime

    bool is_concrete() const { return concrete >= 0; }

    static Index spacetime(std::string n) { return {IndexKind::Spacetime, -1, std::move(n), 0}; }
    static Index spacetime_c(std::int32_t value) { return {IndexKind::Spacetime, value, {}, 0}; }
    static Index internal(std::string n, std::uint16_t range) {
        return {IndexKind::Internal, -1, std::move(n), range};
    }
    static Index internal_c(std::int32_t value, std::uint16_t range) {
        return {IndexKind::Internal, value, {}, range};
    }

    friend bool operator==(const Index& a, const Index& b) {
        return a.kind == b.kind && a.concrete == b.concrete && a.name == b.name;
    }
    friend bool operator!=(const Index& a, const Index& b) { return !(a == b); }
    // Concrete indices order before symbolic ones so slot sorting is stable.
    friend bool operator<(const Index& a, const Index& b) {
        return std::tuple(a.kind, !a.is_concrete(), a.concrete, a.name) <
               std::tuple(b.kind, !b.is_concrete(), b.concrete, b.name);
    }

    std::string str() const {
        if (is_concrete()) return std::to_string(concrete);
        return name;
    }
};

}  // namespace fieldsym
