#pragma once

// Exact rational arithmetic on 64-bit numerator/denominator with overflow
// detection through 128-bit intermediates. Values are kept normalized
// (den > 0, gcd(num, den) = 1) so equality is bitwise.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <compare>

namespace tanglekit {

class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) { assign(n, d); }

    long long num() const { return num_; }
    long long den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }

    static Rational from_i128(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational: division by zero");
        if (d < 0) { n = -n; d = -d; }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("rational: overflow");
        Rational r;
        r.num_ = static_cast<long long>(n);
        r.den_ = static_cast<long long>(d);
        return r;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_i128((__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_,
                         (__int128)a.den_ * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return from_i128((__int128)a.num_ * b.den_ - (__int128)b.num_ * a.den_,
                         (__int128)a.den_ * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_i128((__int128)a.num_ * b.num_, (__int128)a.den_ * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational: division by zero");
        return from_i128((__int128)a.num_ * b.den_, (__int128)a.den_ * b.num_);
    }
    Rational operator-() const {
        Rational r; r.num_ = -num_; r.den_ = den_; return r;
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        __int128 l = (__int128)a.num_ * b.den_, r = (__int128)b.num_ * a.den_;
        return l < r ? std::strong_ordering::less
             : l > r ? std::strong_ordering::greater
                     : std::strong_ordering::equal;
    }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string str() const {
        std::string s = std::to_string(num_);
        if (den_ != 1) s += "/" + std::to_string(den_);
        return s;
    }

    // Accepts "p/q", integers, and finite decimals ("-0.45" -> -9/20).
    static Rational parse(const std::string& text) {
        if (text.empty()) throw std::invalid_argument("rational: empty string");
        auto slash = text.find('/');
        if (slash != std::string::npos) {
            long long n = parse_ll(text.substr(0, slash));
            long long d = parse_ll(text.substr(slash + 1));
            return Rational(n, d);
        }
        auto dot = text.find('.');
        if (dot == std::string::npos) return Rational(parse_ll(text));
        std::string ip = text.substr(0, dot), fp = text.substr(dot + 1);
        bool neg = !ip.empty() && ip[0] == '-';
        if (neg || (!ip.empty() && ip[0] == '+')) ip = ip.substr(1);
        if (fp.size() > 18) throw std::invalid_argument("rational: too many decimal digits");
        __int128 den = 1;
        for (size_t i = 0; i < fp.size(); ++i) den *= 10;
        __int128 num = (__int128)(ip.empty() ? 0 : parse_ll(ip)) * den
                     + (fp.empty() ? 0 : parse_ll(fp));
        if (neg) num = -num;
        return from_i128(num, den);
    }

private:
    long long num_, den_;

    void assign(long long n, long long d) {
        *this = from_i128(n, d);
    }
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        return a < 0 ? -a : a;
    }
    static long long parse_ll(const std::string& s) {
        if (s.empty()) throw std::invalid_argument("rational: bad number '" + s + "'");
        size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("rational: bad number '" + s + "'");
        return v;
    }
};

inline Rational abs(const Rational& r) { return r < Rational(0) ? -r : r; }

inline Rational pow(Rational base, long long e) {
    if (e < 0) { base = Rational(1) / base; e = -e; }
    Rational acc(1);
    while (e > 0) {
        if (e & 1) acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

} // namespace tanglekit
