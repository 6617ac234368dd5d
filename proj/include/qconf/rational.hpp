#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>

#include "qconf/errors.hpp"

namespace qconf {

// Exact rational with 64-bit parts, always kept in lowest terms with den > 0.
class rational {
public:
    rational() = default;
    rational(std::int64_t n) : num_(n), den_(1) {}
    rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return double(num_) / double(den_); }
    bool is_integer() const { return den_ == 1; }

    std::string str() const {
        return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend rational operator+(rational a, rational b) {
        auto g = std::gcd(a.den_, b.den_);
        return rational(a.num_ * (b.den_ / g) + b.num_ * (a.den_ / g), a.den_ / g * b.den_);
    }
    friend rational operator-(rational a) { return rational(-a.num_, a.den_); }
    friend rational operator-(rational a, rational b) { return a + (-b); }
    friend rational operator*(rational a, rational b) {
        auto g1 = std::gcd(a.num_, b.den_);
        auto g2 = std::gcd(b.num_, a.den_);
        if (g1 == 0) g1 = 1;
        if (g2 == 0) g2 = 1;
        return rational((a.num_ / g1) * (b.num_ / g2), (a.den_ / g2) * (b.den_ / g1));
    }
    friend rational operator/(rational a, rational b) {
        if (b.num_ == 0) fail(error_kind::domain, "rational division by zero");
        return a * rational(b.den_, b.num_);
    }
    rational inverse() const { return rational(1) / *this; }

    friend bool operator==(rational a, rational b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator!=(rational a, rational b) { return !(a == b); }
    friend bool operator<(rational a, rational b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }
    friend bool operator>(rational a, rational b) { return b < a; }
    friend bool operator<=(rational a, rational b) { return !(b < a); }
    friend bool operator>=(rational a, rational b) { return !(a < b); }

    friend std::ostream& operator<<(std::ostream& os, rational r) { return os << r.str(); }

    // Smallest integer >= this.
    std::int64_t ceil() const {
        auto q = num_ / den_;
        if (num_ % den_ != 0 && num_ > 0) ++q;
        return q;
    }

private:
    void normalize() {
        if (den_ == 0) fail(error_kind::domain, "rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        auto g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace qconf
