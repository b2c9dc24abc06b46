// Exact rational numbers in canonical form (gcd 1, positive denominator).
// The feasibility engine is built entirely on these; there are no tolerance
// parameters anywhere in the pipeline.
#pragma once

#include <cassert>
#include <cstdint>
#include <string>
#include <utility>

#include "nn2flow/bigint.hpp"

namespace nn2flow {

class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(int v) : num_(v), den_(1) {}
    Rational(long v) : num_(v), den_(1) {}
    Rational(long long v) : num_(v), den_(1) {}
    Rational(BigInt v) : num_(std::move(v)), den_(1) {}
    Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
        assert(!den_.is_zero());
        normalize();
    }

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }

    int sign() const { return num_.sign(); }
    bool is_zero() const { return num_.is_zero(); }
    bool is_integer() const { return den_ == BigInt(1); }

    friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_, NoNorm{}); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        assert(!b.is_zero());
        return Rational(a.num_ * b.den_, a.den_ * b.num_);
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    static int cmp(const Rational& a, const Rational& b) {
        // denominators are positive, so cross-multiplication preserves order
        return BigInt::cmp(a.num_ * b.den_, b.num_ * a.den_);
    }
    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a, b) == 0; }
    friend bool operator!=(const Rational& a, const Rational& b) { return cmp(a, b) != 0; }
    friend bool operator<(const Rational& a, const Rational& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const Rational& a, const Rational& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const Rational& a, const Rational& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const Rational& a, const Rational& b) { return cmp(a, b) >= 0; }

    BigInt floor() const {
        auto [q, r] = BigInt::divmod(num_, den_);
        if (r.sign() < 0) return q - BigInt(1);
        return q;
    }
    BigInt ceil() const {
        auto [q, r] = BigInt::divmod(num_, den_);
        if (r.sign() > 0) return q + BigInt(1);
        return q;
    }

    // "n" for integers, "n/d" otherwise
    std::string to_string() const {
        if (is_integer()) return num_.to_string();
        return num_.to_string() + "/" + den_.to_string();
    }

    // Fixed-point decimal rendering via integer arithmetic only; rounds half
    // away from zero. places == 0 yields no decimal point.
    std::string to_decimal(int places) const {
        BigInt scale(1);
        for (int i = 0; i < places; ++i) scale *= BigInt(10);
        BigInt scaled_num = num_.abs() * scale * BigInt(2) + den_;  // adds 1/2 ulp
        BigInt units = scaled_num / (den_ * BigInt(2));
        std::string digits = units.to_string();
        if (places > 0 && digits.size() <= static_cast<std::size_t>(places))
            digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
        std::string out;
        if (sign() < 0 && !units.is_zero()) out += "-";
        if (places == 0) {
            out += digits;
        } else {
            out += digits.substr(0, digits.size() - static_cast<std::size_t>(places));
            out += ".";
            out += digits.substr(digits.size() - static_cast<std::size_t>(places));
        }
        return out;
    }

private:
    struct NoNorm {};
    Rational(BigInt num, BigInt den, NoNorm) : num_(std::move(num)), den_(std::move(den)) {}

    void normalize() {
        if (den_.sign() < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        if (num_.is_zero()) {
            den_ = BigInt(1);
            return;
        }
        BigInt g = BigInt::gcd(num_, den_);
        if (g != BigInt(1)) {
            num_ = num_ / g;
            den_ = den_ / g;
        }
    }

    BigInt num_;
    BigInt den_;  // > 0 always
};

}  // namespace nn2flow
