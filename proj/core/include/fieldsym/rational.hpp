#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fieldsym {

/// Thrown when exact integer arithmetic would overflow 64 bits.
struct OverflowError : std::runtime_error {
    explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

/// Exact rational number over checked 64-bit integers, always stored in
/// lowest terms with a positive denominator.
class Rational {
  public:
    Rational() = default;
    Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT: implicit by design
    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_one() const { return num_ == 1 && den_ == 1; }
    bool is_integer() const { return den_ == 1; }
    bool is_negative() const { return num_ < 0; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    Rational operator-() const { return Rational(checked_neg(num_), den_, unchecked_tag{}); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(checked_add(checked_mul(a.num_, b.den_), checked_mul(b.num_, a.den_)),
                        checked_mul(a.den_, b.den_));
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(checked_mul(a.num_, b.num_), checked_mul(a.den_, b.den_));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return Rational(checked_mul(a.num_, b.den_), checked_mul(a.den_, b.num_));
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        // den_ > 0 on both sides, so cross-multiplication preserves order.
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }

    /// Integer power with exact arithmetic; negative exponents invert.
    Rational pow(int exponent) const {
        if (exponent == 0) return Rational(1);
        Rational base = exponent > 0 ? *this : Rational(1) / *this;
        int n = exponent > 0 ? exponent : -exponent;
        Rational result(1);
        while (n > 0) {
            if (n & 1) result *= base;
            base = (n > 1) ? base * base : base;
            n >>= 1;
        }
        return result;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

  private:
    struct unchecked_tag {};
    Rational(std::int64_t n, std::int64_t d, unchecked_tag) : num_(n), den_(d) {}

    static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_add_overflow(a, b, &r)) throw OverflowError("rational add overflow");
        return r;
    }
    static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("rational mul overflow");
        return r;
    }
    static std::int64_t checked_neg(std::int64_t a) {
        if (a == INT64_MIN) throw OverflowError("rational negate overflow");
        return -a;
    }
    static std::int64_t gcd64(std::int64_t a, std::int64_t b) {
        while (b != 0) {
            std::int64_t t = a % b;
            a = b;
            b = t;
        }
        return a < 0 ? checked_neg(a) : a;
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("rational with zero denominator");
        if (num_ == 0) {
            den_ = 1;
            return;
        }
        if (den_ < 0) {
            num_ = checked_neg(num_);
            den_ = checked_neg(den_);
        }
        std::int64_t g = gcd64(num_, den_);
        num_ /= g;
        den_ /= g;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace fieldsym
