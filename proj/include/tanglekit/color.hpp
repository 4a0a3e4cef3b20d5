#pragma once

// Colour values: the tagged payloads registers carry. Equality is exact for
// rational, finite and group variants and tolerance-based (EPS_EQ) for the
// float variants. Hermitian payloads are checked on construction.

#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "linalg.hpp"
#include "rational.hpp"

namespace tanglekit {

inline constexpr double EPS_EQ = 1e-9;    // float colour equality
inline constexpr double EPS_HERM = 1e-12; // Hermiticity defect

// A scalar that is either exact or floating; used both as a colour payload
// helper and as the parameter slot of an operation label.
struct Scalar {
    bool exact = true;
    Rational r;
    double f = 0.0;

    Scalar() = default;
    Scalar(const Rational& q) : exact(true), r(q) {}
    Scalar(double x) : exact(false), f(x) {}

    double to_double() const { return exact ? r.to_double() : f; }
    std::string str() const;

    friend bool operator==(const Scalar& a, const Scalar& b) {
        if (a.exact != b.exact) return false;
        return a.exact ? a.r == b.r : a.f == b.f;
    }
};

struct RatVec {
    std::vector<Rational> v;
    friend bool operator==(const RatVec&, const RatVec&) = default;
};

struct FloatVec {
    std::vector<double> v;
    friend bool operator==(const FloatVec&, const FloatVec&) = default;
};

// Permutation of {0..n-1}, stored as the image list.
struct Permutation {
    std::vector<int> map;

    friend bool operator==(const Permutation&, const Permutation&) = default;

    static Permutation identity(int n) {
        Permutation p;
        p.map.resize(n);
        for (int i = 0; i < n; ++i) p.map[i] = i;
        return p;
    }
    Permutation inverse() const {
        Permutation q;
        q.map.resize(map.size());
        for (size_t i = 0; i < map.size(); ++i) q.map[map[i]] = static_cast<int>(i);
        return q;
    }
    // (p * q)(i) = p(q(i))
    friend Permutation operator*(const Permutation& p, const Permutation& q) {
        Permutation r;
        r.map.resize(q.map.size());
        for (size_t i = 0; i < q.map.size(); ++i) r.map[i] = p.map[q.map[i]];
        return r;
    }
};

// Index into a finite carrier (lookup-table quandles, GF(p) colourings).
struct FiniteElem {
    int index = 0;
    friend bool operator==(const FiniteElem&, const FiniteElem&) = default;
};

using ColorValue = std::variant<Rational, double, RatVec, FloatVec,
                                RatMatrix, ComplexMatrix, Permutation, FiniteElem>;

// ---------------------------------------------------------------------------

inline bool color_equal(const ColorValue& a, const ColorValue& b, double eps = EPS_EQ) {
    if (a.index() != b.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b);
            if constexpr (std::is_same_v<T, double>) {
                return std::abs(x - y) <= eps;
            } else if constexpr (std::is_same_v<T, FloatVec>) {
                if (x.v.size() != y.v.size()) return false;
                for (size_t i = 0; i < x.v.size(); ++i)
                    if (std::abs(x.v[i] - y.v[i]) > eps) return false;
                return true;
            } else if constexpr (std::is_same_v<T, ComplexMatrix>) {
                if (x.n != y.n) return false;
                for (size_t i = 0; i < x.a.size(); ++i)
                    if (std::abs(x.a[i] - y.a[i]) > eps) return false;
                return true;
            } else {
                return x == y;
            }
        },
        a);
}

inline long long quantize(double x, double eps = EPS_EQ) {
    return static_cast<long long>(std::llround(x / eps));
}

inline std::string float_repr(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Canonical encoding used by hashing and invariant profiles. Float payloads
// are quantized at EPS_EQ so that equal-within-tolerance colours collide.
inline std::string color_key(const ColorValue& c) {
    std::ostringstream os;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Rational>) {
                os << "q" << x.str();
            } else if constexpr (std::is_same_v<T, double>) {
                os << "f" << quantize(x);
            } else if constexpr (std::is_same_v<T, RatVec>) {
                os << "qv";
                for (const auto& e : x.v) os << e.str() << ",";
            } else if constexpr (std::is_same_v<T, FloatVec>) {
                os << "fv";
                for (double e : x.v) os << quantize(e) << ",";
            } else if constexpr (std::is_same_v<T, RatMatrix>) {
                os << "qm" << x.rows << "x" << x.cols << ":";
                for (const auto& e : x.a) os << e.str() << ",";
            } else if constexpr (std::is_same_v<T, ComplexMatrix>) {
                os << "cm" << x.n << ":";
                for (const auto& e : x.a)
                    os << quantize(e.real()) << "+" << quantize(e.imag()) << "i,";
            } else if constexpr (std::is_same_v<T, Permutation>) {
                os << "p";
                for (int e : x.map) os << e << ",";
            } else if constexpr (std::is_same_v<T, FiniteElem>) {
                os << "e" << x.index;
            }
        },
        c);
    return os.str();
}

// Human-oriented rendering (DOT labels, reports).
inline std::string color_str(const ColorValue& c) {
    std::ostringstream os;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Rational>) {
                os << x.str();
            } else if constexpr (std::is_same_v<T, double>) {
                os << float_repr(x);
            } else if constexpr (std::is_same_v<T, RatVec>) {
                os << "(";
                for (size_t i = 0; i < x.v.size(); ++i) os << (i ? "," : "") << x.v[i].str();
                os << ")";
            } else if constexpr (std::is_same_v<T, FloatVec>) {
                os << "(";
                for (size_t i = 0; i < x.v.size(); ++i) os << (i ? "," : "") << float_repr(x.v[i]);
                os << ")";
            } else if constexpr (std::is_same_v<T, RatMatrix>) {
                os << "[";
                for (int i = 0; i < x.rows; ++i) {
                    if (i) os << ";";
                    for (int j = 0; j < x.cols; ++j)
                        os << (j ? "," : "") << x.at(i, j).str();
                }
                os << "]";
            } else if constexpr (std::is_same_v<T, ComplexMatrix>) {
                os << "[";
                for (int i = 0; i < x.n; ++i) {
                    if (i) os << ";";
                    for (int j = 0; j < x.n; ++j) {
                        if (j) os << ",";
                        os << float_repr(x.at(i, j).real());
                        if (std::abs(x.at(i, j).imag()) > 0)
                            os << "+" << float_repr(x.at(i, j).imag()) << "i";
                    }
                }
                os << "]";
            } else if constexpr (std::is_same_v<T, Permutation>) {
                os << "perm(";
                for (size_t i = 0; i < x.map.size(); ++i) os << (i ? " " : "") << x.map[i];
                os << ")";
            } else if constexpr (std::is_same_v<T, FiniteElem>) {
                os << "#" << x.index;
            }
        },
        c);
    return os.str();
}

inline std::string Scalar::str() const { return exact ? r.str() : float_repr(f); }

} // namespace tanglekit
