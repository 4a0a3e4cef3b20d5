#pragma once

// Quandles: a carrier of colours together with a family B of binary
// operations, each invertible, satisfying idempotence, reversibility and
// right self-distributivity. Concrete families:
//
//   linear       x <|_s y = (1-s)x + s y          s != 1
//   loglinear    x <|_s y = x^(1-s) y^s           positive scalars
//   conjugation  x <| y   = y^-1 x y              group carriers
//   table        lookup in an explicit finite table
//   kauffman     x <| y   = 2y - x mod p          GF(p), self-inverse
//
// Operations are pure; a Quandle is immutable after construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "color.hpp"

namespace tanglekit {

enum class Carrier {
    RationalScalar,
    FloatScalar,
    RationalVector,
    FloatVector,
    HermitianRational,
    HermitianComplex,
    PermutationGroup,
    MatrixGroup,
    Finite,
};

enum class OpFamily { Linear, Loglinear, Conjugation, Table, Kauffman };

struct OpLabel {
    OpFamily family = OpFamily::Linear;
    Scalar param;        // s for linear / loglinear
    int table_index = 0; // which operation of a table family
    bool inverse = false;

    friend bool operator==(const OpLabel& a, const OpLabel& b) {
        return a.family == b.family && a.param == b.param &&
               a.table_index == b.table_index && a.inverse == b.inverse;
    }

    OpLabel inverted() const {
        OpLabel o = *this;
        o.inverse = !o.inverse;
        return o;
    }

    std::string key() const {
        std::string s;
        switch (family) {
            case OpFamily::Linear: s = "lin[" + param.str() + "]"; break;
            case OpFamily::Loglinear: s = "log[" + param.str() + "]"; break;
            case OpFamily::Conjugation: s = "conj"; break;
            case OpFamily::Table: s = "tab" + std::to_string(table_index); break;
            case OpFamily::Kauffman: s = "kauf"; break;
        }
        if (inverse) s += "^-1";
        return s;
    }
};

inline OpLabel linear_op(const Rational& s, bool inverse = false) {
    OpLabel o;
    o.family = OpFamily::Linear;
    o.param = Scalar(s);
    o.inverse = inverse;
    return o;
}

inline OpLabel linear_op_f(double s, bool inverse = false) {
    OpLabel o;
    o.family = OpFamily::Linear;
    o.param = Scalar(s);
    o.inverse = inverse;
    return o;
}

struct Quandle {
    Carrier carrier = Carrier::RationalScalar;
    int dim = 1;                              // vector length / matrix dim / permutation degree
    std::set<OpFamily> families;
    int modulus = 0;                          // kauffman prime
    int finite_size = 0;                      // table carrier size
    std::vector<std::vector<int>> tables;     // per op: finite_size * finite_size entries
    std::vector<std::vector<int>> inv_tables; // inv_tables[t][z*n+y] = x with table[x][y]=z, -1 if none
    std::vector<Scalar> op_pool;              // parameters used when sampling ops

    bool exact_carrier() const {
        switch (carrier) {
            case Carrier::RationalScalar:
            case Carrier::RationalVector:
            case Carrier::HermitianRational:
            case Carrier::PermutationGroup:
            case Carrier::MatrixGroup:
            case Carrier::Finite: return true;
            default: return false;
        }
    }
    bool finite_carrier() const {
        return carrier == Carrier::Finite ||
               (carrier == Carrier::PermutationGroup && dim <= 5);
    }

    std::string key() const {
        std::string s = "carrier" + std::to_string(static_cast<int>(carrier)) +
                        ":d" + std::to_string(dim);
        if (modulus) s += ":p" + std::to_string(modulus);
        if (finite_size) s += ":n" + std::to_string(finite_size);
        for (auto f : families) s += ":f" + std::to_string(static_cast<int>(f));
        for (const auto& t : tables) {
            s += ":t";
            for (int e : t) s += std::to_string(e) + ",";
        }
        return s;
    }
    friend bool operator==(const Quandle& a, const Quandle& b) { return a.key() == b.key(); }
};

// ---------------------------------------------------------------------------
// Construction helpers
// ---------------------------------------------------------------------------

inline Quandle make_linear_rational(std::vector<Rational> pool = {Rational(1, 4), Rational(1, 2), Rational(3, 4)}) {
    Quandle q;
    q.carrier = Carrier::RationalScalar;
    q.families = {OpFamily::Linear};
    for (auto& s : pool) q.op_pool.push_back(Scalar(s));
    return q;
}

inline Quandle make_linear_float() {
    Quandle q;
    q.carrier = Carrier::FloatScalar;
    q.families = {OpFamily::Linear};
    q.op_pool = {Scalar(0.25), Scalar(0.5), Scalar(0.75)};
    return q;
}

inline Quandle make_loglinear() {
    Quandle q;
    q.carrier = Carrier::FloatScalar;
    q.families = {OpFamily::Loglinear};
    q.op_pool = {Scalar(0.25), Scalar(0.5), Scalar(0.75)};
    return q;
}

inline Quandle make_hermitian_rational(int d) {
    Quandle q;
    q.carrier = Carrier::HermitianRational;
    q.dim = d;
    q.families = {OpFamily::Linear};
    q.op_pool = {Scalar(Rational(1, 3)), Scalar(Rational(1, 2))};
    return q;
}

inline Quandle make_hermitian_complex(int d) {
    Quandle q;
    q.carrier = Carrier::HermitianComplex;
    q.dim = d;
    q.families = {OpFamily::Linear};
    q.op_pool = {Scalar(0.5)};
    return q;
}

inline Quandle make_conjugation_perm(int degree) {
    Quandle q;
    q.carrier = Carrier::PermutationGroup;
    q.dim = degree;
    q.families = {OpFamily::Conjugation};
    return q;
}

inline Quandle make_conjugation_matrix(int d) {
    Quandle q;
    q.carrier = Carrier::MatrixGroup;
    q.dim = d;
    q.families = {OpFamily::Conjugation};
    return q;
}

inline Quandle make_kauffman(int p) {
    if (p < 2) throw std::invalid_argument("kauffman: modulus must be >= 2");
    Quandle q;
    q.carrier = Carrier::Finite;
    q.finite_size = p;
    q.modulus = p;
    q.families = {OpFamily::Kauffman};
    return q;
}

inline Quandle make_table(std::vector<std::vector<int>> tables, int size) {
    Quandle q;
    q.carrier = Carrier::Finite;
    q.finite_size = size;
    q.families = {OpFamily::Table};
    q.tables = std::move(tables);
    q.inv_tables.resize(q.tables.size());
    for (size_t t = 0; t < q.tables.size(); ++t) {
        if (static_cast<int>(q.tables[t].size()) != size * size)
            throw std::invalid_argument("table quandle: wrong table size");
        q.inv_tables[t].assign(static_cast<size_t>(size) * size, -1);
        for (int x = 0; x < size; ++x)
            for (int y = 0; y < size; ++y) {
                int z = q.tables[t][x * size + y];
                if (z < 0 || z >= size)
                    throw std::invalid_argument("table quandle: entry out of range");
                q.inv_tables[t][z * size + y] = x; // last writer wins; non-bijective columns miss
            }
    }
    return q;
}

// Dihedral quandle table on Z_n (x <| y = 2y - x mod n); handy finite fixture.
inline Quandle make_dihedral_table(int n) {
    std::vector<int> t(static_cast<size_t>(n) * n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) t[x * n + y] = ((2 * y - x) % n + n) % n;
    return make_table({t}, n);
}

// ---------------------------------------------------------------------------
// Applying operations
// ---------------------------------------------------------------------------

inline void require_admissible(const Quandle& q, const OpLabel& op) {
    if (!q.families.count(op.family))
        throw std::domain_error("op family not admissible for this quandle");
    if (op.family == OpFamily::Linear || op.family == OpFamily::Loglinear) {
        if (op.param.exact ? op.param.r == Rational(1) : op.param.f == 1.0)
            throw std::domain_error("linear/loglinear parameter s = 1 is not invertible");
        if (q.exact_carrier() && !op.param.exact)
            throw std::domain_error("exact carrier requires an exact op parameter");
    }
    if (op.family == OpFamily::Table &&
        (op.table_index < 0 || op.table_index >= static_cast<int>(q.tables.size())))
        throw std::domain_error("table op index out of range");
}

namespace detail {

inline Rational lin_rat(const Rational& x, const Rational& y, const Rational& s) {
    return (Rational(1) - s) * x + s * y;
}
inline Rational lin_rat_inv(const Rational& z, const Rational& y, const Rational& s) {
    return (z - s * y) / (Rational(1) - s);
}
inline double lin_f(double x, double y, double s) { return (1.0 - s) * x + s * y; }
inline double lin_f_inv(double z, double y, double s) { return (z - s * y) / (1.0 - s); }

// Forward application of the base (non-inverted) operation.
inline ColorValue base_apply(const Quandle& q, const OpLabel& op,
                             const ColorValue& x, const ColorValue& y, bool inverse) {
    switch (op.family) {
        case OpFamily::Linear: {
            if (std::holds_alternative<Rational>(x)) {
                if (!op.param.exact) throw std::domain_error("rational colour with float parameter");
                const Rational& s = op.param.r;
                return inverse ? lin_rat_inv(std::get<Rational>(x), std::get<Rational>(y), s)
                               : lin_rat(std::get<Rational>(x), std::get<Rational>(y), s);
            }
            if (std::holds_alternative<double>(x)) {
                double s = op.param.to_double();
                return inverse ? lin_f_inv(std::get<double>(x), std::get<double>(y), s)
                               : lin_f(std::get<double>(x), std::get<double>(y), s);
            }
            if (std::holds_alternative<RatVec>(x)) {
                if (!op.param.exact) throw std::domain_error("rational colour with float parameter");
                const Rational& s = op.param.r;
                const auto& xv = std::get<RatVec>(x).v;
                const auto& yv = std::get<RatVec>(y).v;
                if (xv.size() != yv.size()) throw std::domain_error("vector length mismatch");
                RatVec r;
                r.v.resize(xv.size());
                for (size_t i = 0; i < xv.size(); ++i)
                    r.v[i] = inverse ? lin_rat_inv(xv[i], yv[i], s) : lin_rat(xv[i], yv[i], s);
                return r;
            }
            if (std::holds_alternative<FloatVec>(x)) {
                double s = op.param.to_double();
                const auto& xv = std::get<FloatVec>(x).v;
                const auto& yv = std::get<FloatVec>(y).v;
                if (xv.size() != yv.size()) throw std::domain_error("vector length mismatch");
                FloatVec r;
                r.v.resize(xv.size());
                for (size_t i = 0; i < xv.size(); ++i)
                    r.v[i] = inverse ? lin_f_inv(xv[i], yv[i], s) : lin_f(xv[i], yv[i], s);
                return r;
            }
            if (std::holds_alternative<RatMatrix>(x)) {
                if (!op.param.exact) throw std::domain_error("rational colour with float parameter");
                const Rational& s = op.param.r;
                const auto& xm = std::get<RatMatrix>(x);
                const auto& ym = std::get<RatMatrix>(y);
                if (xm.rows != ym.rows || xm.cols != ym.cols)
                    throw std::domain_error("matrix shape mismatch");
                RatMatrix r(xm.rows, xm.cols);
                for (size_t i = 0; i < r.a.size(); ++i)
                    r.a[i] = inverse ? lin_rat_inv(xm.a[i], ym.a[i], s) : lin_rat(xm.a[i], ym.a[i], s);
                return r;
            }
            if (std::holds_alternative<ComplexMatrix>(x)) {
                double s = op.param.to_double();
                const auto& xm = std::get<ComplexMatrix>(x);
                const auto& ym = std::get<ComplexMatrix>(y);
                if (xm.n != ym.n) throw std::domain_error("matrix shape mismatch");
                ComplexMatrix r(xm.n);
                for (size_t i = 0; i < r.a.size(); ++i)
                    r.a[i] = inverse ? (xm.a[i] - s * ym.a[i]) / (1.0 - s)
                                     : (1.0 - s) * xm.a[i] + s * ym.a[i];
                return r;
            }
            throw std::domain_error("linear op: unsupported colour variant");
        }
        case OpFamily::Loglinear: {
            if (!std::holds_alternative<double>(x) || !std::holds_alternative<double>(y))
                throw std::domain_error("loglinear op: float scalar colours required");
            double xv = std::get<double>(x), yv = std::get<double>(y);
            if (xv <= 0.0 || yv <= 0.0)
                throw std::domain_error("loglinear op: non-positive operand");
            double s = op.param.to_double();
            return inverse ? std::exp((std::log(xv) - s * std::log(yv)) / (1.0 - s))
                           : std::exp((1.0 - s) * std::log(xv) + s * std::log(yv));
        }
        case OpFamily::Conjugation: {
            if (std::holds_alternative<Permutation>(x)) {
                const auto& xp = std::get<Permutation>(x);
                const auto& yp = std::get<Permutation>(y);
                return inverse ? yp * xp * yp.inverse() : yp.inverse() * xp * yp;
            }
            if (std::holds_alternative<RatMatrix>(x)) {
                const auto& xm = std::get<RatMatrix>(x);
                const auto& ym = std::get<RatMatrix>(y);
                RatMatrix yi = invert_exact(ym);
                return inverse ? ym * xm * yi : yi * xm * ym;
            }
            throw std::domain_error("conjugation op: group colour required");
        }
        case OpFamily::Table: {
            const auto& xe = std::get<FiniteElem>(x);
            const auto& ye = std::get<FiniteElem>(y);
            const int n = q.finite_size;
            if (xe.index < 0 || xe.index >= n || ye.index < 0 || ye.index >= n)
                throw std::domain_error("table op: element out of carrier");
            int v = inverse ? q.inv_tables[op.table_index][xe.index * n + ye.index]
                            : q.tables[op.table_index][xe.index * n + ye.index];
            if (v < 0) throw std::domain_error("table op: missing inverse entry (table miss)");
            return FiniteElem{v};
        }
        case OpFamily::Kauffman: {
            const auto& xe = std::get<FiniteElem>(x);
            const auto& ye = std::get<FiniteElem>(y);
            const int p = q.modulus;
            // 2y - x is its own inverse.
            return FiniteElem{((2 * ye.index - xe.index) % p + p) % p};
        }
    }
    throw std::logic_error("unreachable");
}

} // namespace detail

// x <|_op y (the label's own inverse flag already folded in).
inline ColorValue op_apply(const Quandle& q, const OpLabel& op,
                           const ColorValue& x, const ColorValue& y) {
    require_admissible(q, op);
    return detail::base_apply(q, op, x, y, op.inverse);
}

// The unique x with op_apply(q, op, x, y) == z.
inline ColorValue op_invert(const Quandle& q, const OpLabel& op,
                            const ColorValue& z, const ColorValue& y) {
    require_admissible(q, op);
    return detail::base_apply(q, op, z, y, !op.inverse);
}

// ---------------------------------------------------------------------------
// Axiom checking
// ---------------------------------------------------------------------------

struct AxiomCheck {
    bool pass = true;
    std::string witness; // rendered offending triple, empty when passing
};

struct AxiomReport {
    AxiomCheck idempotence, reversibility, distributivity;
    bool exhaustive = false;
    int triples_checked = 0;

    bool all_pass() const {
        return idempotence.pass && reversibility.pass && distributivity.pass;
    }
};

namespace detail {

inline std::vector<ColorValue> enumerate_carrier(const Quandle& q) {
    std::vector<ColorValue> out;
    if (q.carrier == Carrier::Finite) {
        for (int i = 0; i < q.finite_size; ++i) out.push_back(FiniteElem{i});
    } else if (q.carrier == Carrier::PermutationGroup) {
        std::vector<int> base(q.dim);
        for (int i = 0; i < q.dim; ++i) base[i] = i;
        do {
            Permutation p;
            p.map = base;
            out.push_back(p);
        } while (std::next_permutation(base.begin(), base.end()));
    }
    return out;
}

inline std::vector<OpLabel> enumerate_ops(const Quandle& q) {
    std::vector<OpLabel> ops;
    for (auto f : q.families) {
        switch (f) {
            case OpFamily::Conjugation: {
                OpLabel o;
                o.family = OpFamily::Conjugation;
                ops.push_back(o);
                break;
            }
            case OpFamily::Kauffman: {
                OpLabel o;
                o.family = OpFamily::Kauffman;
                ops.push_back(o);
                break;
            }
            case OpFamily::Table:
                for (int t = 0; t < static_cast<int>(q.tables.size()); ++t) {
                    OpLabel o;
                    o.family = OpFamily::Table;
                    o.table_index = t;
                    ops.push_back(o);
                }
                break;
            case OpFamily::Linear:
            case OpFamily::Loglinear:
                for (const auto& s : q.op_pool) {
                    OpLabel o;
                    o.family = f;
                    o.param = s;
                    ops.push_back(o);
                }
                break;
        }
    }
    return ops;
}

} // namespace detail

inline ColorValue sample_color(const Quandle& q, std::mt19937& rng) {
    auto rat = [&]() {
        std::uniform_int_distribution<long long> num(-20, 20), den(1, 12);
        return Rational(num(rng), den(rng));
    };
    auto flt = [&]() {
        std::uniform_real_distribution<double> d(0.05, 4.0);
        return d(rng);
    };
    switch (q.carrier) {
        case Carrier::RationalScalar: return rat();
        case Carrier::FloatScalar: return flt();
        case Carrier::RationalVector: {
            RatVec v;
            for (int i = 0; i < q.dim; ++i) v.v.push_back(rat());
            return v;
        }
        case Carrier::FloatVector: {
            FloatVec v;
            for (int i = 0; i < q.dim; ++i) v.v.push_back(flt());
            return v;
        }
        case Carrier::HermitianRational: {
            RatMatrix m(q.dim, q.dim);
            for (int i = 0; i < q.dim; ++i)
                for (int j = i; j < q.dim; ++j) m.at(i, j) = m.at(j, i) = rat();
            return m;
        }
        case Carrier::HermitianComplex: {
            ComplexMatrix m(q.dim);
            for (int i = 0; i < q.dim; ++i) {
                m.at(i, i) = flt();
                for (int j = i + 1; j < q.dim; ++j) {
                    std::complex<double> v(flt(), flt());
                    m.at(i, j) = v;
                    m.at(j, i) = std::conj(v);
                }
            }
            return m;
        }
        case Carrier::PermutationGroup: {
            auto p = Permutation::identity(q.dim);
            std::shuffle(p.map.begin(), p.map.end(), rng);
            return p;
        }
        case Carrier::MatrixGroup: {
            // Random invertible rational matrix: start from identity, apply shears.
            RatMatrix m = RatMatrix::identity(q.dim);
            std::uniform_int_distribution<int> idx(0, q.dim - 1), val(-3, 3);
            for (int k = 0; k < 2 * q.dim; ++k) {
                int i = idx(rng), j = idx(rng);
                if (i == j) continue;
                Rational c(val(rng));
                for (int col = 0; col < q.dim; ++col)
                    m.at(i, col) += c * m.at(j, col);
            }
            return m;
        }
        case Carrier::Finite: {
            std::uniform_int_distribution<int> d(0, q.finite_size - 1);
            return FiniteElem{d(rng)};
        }
    }
    throw std::logic_error("unreachable");
}

inline OpLabel sample_op(const Quandle& q, std::mt19937& rng) {
    auto ops = detail::enumerate_ops(q);
    if (ops.empty()) throw std::domain_error("quandle has no admissible operations");
    std::uniform_int_distribution<size_t> d(0, ops.size() - 1);
    return ops[d(rng)];
}

// Exhaustive over finite carriers, sampled (default 1000 seeded triples)
// otherwise. Failures are data: the report carries a witness, no throw.
inline AxiomReport check_axioms(const Quandle& q, unsigned seed = 0, int samples = 1000) {
    AxiomReport rep;
    double eps = q.exact_carrier() ? 0.0 : EPS_EQ;
    auto equal = [&](const ColorValue& a, const ColorValue& b) {
        return q.exact_carrier() ? color_equal(a, b, 0.0) : color_equal(a, b, eps);
    };
    auto witness2 = [](const ColorValue& x, const ColorValue& y, const OpLabel& op) {
        return "x=" + color_str(x) + " y=" + color_str(y) + " op=" + op.key();
    };

    auto run_triple = [&](const ColorValue& x, const ColorValue& y, const ColorValue& z,
                          const OpLabel& op1, const OpLabel& op2) {
        ++rep.triples_checked;
        try {
            if (rep.idempotence.pass && !equal(op_apply(q, op1, x, x), x)) {
                rep.idempotence.pass = false;
                rep.idempotence.witness = witness2(x, x, op1);
            }
            if (rep.reversibility.pass) {
                ColorValue fwd = op_apply(q, op1, x, y);
                ColorValue back = op_invert(q, op1, fwd, y);
                ColorValue fwd2 = op_apply(q, op1, op_invert(q, op1, x, y), y);
                if (!equal(back, x) || !equal(fwd2, x)) {
                    rep.reversibility.pass = false;
                    rep.reversibility.witness = witness2(x, y, op1);
                }
            }
            if (rep.distributivity.pass) {
                ColorValue lhs = op_apply(q, op2, op_apply(q, op1, x, y), z);
                ColorValue rhs = op_apply(q, op1, op_apply(q, op2, x, z), op_apply(q, op2, y, z));
                if (!equal(lhs, rhs)) {
                    rep.distributivity.pass = false;
                    rep.distributivity.witness = witness2(x, y, op1) + " z=" + color_str(z) +
                                                 " op2=" + op2.key();
                }
            }
        } catch (const std::exception& e) {
            // An operation failing on in-carrier inputs is itself an axiom breach.
            rep.reversibility.pass = false;
            rep.reversibility.witness = std::string("operation error: ") + e.what();
        }
    };

    if (q.finite_carrier()) {
        rep.exhaustive = true;
        auto elems = detail::enumerate_carrier(q);
        auto ops = detail::enumerate_ops(q);
        for (const auto& x : elems)
            for (const auto& y : elems)
                for (const auto& z : elems)
                    for (const auto& op1 : ops)
                        for (const auto& op2 : ops) run_triple(x, y, z, op1, op2);
    } else {
        std::mt19937 rng(seed);
        for (int i = 0; i < samples; ++i) {
            ColorValue x = sample_color(q, rng), y = sample_color(q, rng), z = sample_color(q, rng);
            OpLabel op1 = sample_op(q, rng), op2 = sample_op(q, rng);
            run_triple(x, y, z, op1, op2);
        }
    }
    return rep;
}

// Affine recolouring x -> a*x + b, an automorphism of any linear quandle
// (a != 0). The general automorphism group of (Q,B) is left unspecified by
// the axioms; only this family is exposed.
inline ColorValue affine_transform(const ColorValue& c, const Scalar& a, const Scalar& b) {
    if (std::holds_alternative<Rational>(c)) {
        if (!a.exact || !b.exact) throw std::domain_error("affine map on rationals must be exact");
        return a.r * std::get<Rational>(c) + b.r;
    }
    if (std::holds_alternative<double>(c))
        return a.to_double() * std::get<double>(c) + b.to_double();
    if (std::holds_alternative<RatVec>(c)) {
        if (!a.exact || !b.exact) throw std::domain_error("affine map on rationals must be exact");
        RatVec r = std::get<RatVec>(c);
        for (auto& e : r.v) e = a.r * e + b.r;
        return r;
    }
    if (std::holds_alternative<FloatVec>(c)) {
        FloatVec r = std::get<FloatVec>(c);
        for (auto& e : r.v) e = a.to_double() * e + b.to_double();
        return r;
    }
    if (std::holds_alternative<RatMatrix>(c)) {
        if (!a.exact || !b.exact) throw std::domain_error("affine map on rationals must be exact");
        RatMatrix r = std::get<RatMatrix>(c);
        for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = a.r * r.a[i];
        for (int i = 0; i < std::min(r.rows, r.cols); ++i) r.at(i, i) += b.r;
        return r;
    }
    if (std::holds_alternative<ComplexMatrix>(c)) {
        ComplexMatrix r = std::get<ComplexMatrix>(c);
        for (auto& e : r.a) e *= a.to_double();
        for (int i = 0; i < r.n; ++i) r.at(i, i) += b.to_double();
        return r;
    }
    throw std::domain_error("affine map undefined for this colour variant");
}

} // namespace tanglekit
