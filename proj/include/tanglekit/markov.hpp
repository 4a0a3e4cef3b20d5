#pragma once

// Iterated concatenation of machine copies, steady states via closure, the
// basic linear iteration with its invariant weights, the two-register Markov
// unit, and the feed-forward / feed-back variants whose one-step transition
// matrices need not be stochastic even though the two-step composite is.

#include "canonical.hpp"

namespace tanglekit::markov {

// --- transition matrices ---------------------------------------------------

struct TransitionMatrix {
    RatMatrix p;

    bool row_stochastic() const {
        for (int i = 0; i < p.rows; ++i) {
            Rational sum(0);
            for (int j = 0; j < p.cols; ++j) {
                if (p.at(i, j) < Rational(0)) return false;
                sum += p.at(i, j);
            }
            if (!(sum == Rational(1))) return false;
        }
        return true;
    }
    bool doubly_stochastic() const {
        if (!row_stochastic()) return false;
        for (int j = 0; j < p.cols; ++j) {
            Rational sum(0);
            for (int i = 0; i < p.rows; ++i) sum += p.at(i, j);
            if (!(sum == Rational(1))) return false;
        }
        return true;
    }
};

struct StabilityReport {
    bool stable = true;
    int matrix_index = -1;
    int row = -1, col = -1;
    Rational witness;
};

// Internally stable iff every one-step transition matrix is row stochastic.
inline StabilityReport internal_stability(const std::vector<TransitionMatrix>& steps) {
    StabilityReport rep;
    for (size_t k = 0; k < steps.size(); ++k) {
        const RatMatrix& p = steps[k].p;
        for (int i = 0; i < p.rows; ++i) {
            Rational sum(0);
            for (int j = 0; j < p.cols; ++j) sum += p.at(i, j);
            for (int j = 0; j < p.cols; ++j) {
                if (p.at(i, j) < Rational(0) || Rational(1) < p.at(i, j)) {
                    rep.stable = false;
                    rep.matrix_index = static_cast<int>(k);
                    rep.row = i;
                    rep.col = j;
                    rep.witness = p.at(i, j);
                    return rep;
                }
            }
            if (!(sum == Rational(1))) {
                rep.stable = false;
                rep.matrix_index = static_cast<int>(k);
                rep.row = i;
                rep.col = 0;
                rep.witness = sum;
                return rep;
            }
        }
    }
    return rep;
}

// --- invariant weights of the basic iteration --------------------------------

// x_{0:n} = sum_i w_i(s) u_{n-i} with w_i = s(1-s)^i for i < n and
// w_n = (1-s)^n; the weights telescope to 1.
inline std::vector<Rational> basic_weights(const Rational& s, int n) {
    if (s == Rational(1)) throw std::domain_error("basic_weights: s = 1 is not invertible");
    if (n < 0) throw std::invalid_argument("basic_weights: negative length");
    std::vector<Rational> w;
    Rational one_minus = Rational(1) - s;
    Rational pw(1);
    for (int i = 0; i < n; ++i) {
        w.push_back(s * pw);
        pw *= one_minus;
    }
    w.push_back(pw);
    return w;
}

// --- units --------------------------------------------------------------------

inline void require_unit_param(const Rational& s) {
    if (s == Rational(0) || s == Rational(1))
        throw std::domain_error("unit parameter must avoid 0 and 1");
}

// Single-interaction unit: strand [x, xu], free agent u.
inline Machine basic_unit(const Rational& s) {
    if (s == Rational(1)) throw std::domain_error("basic unit: s = 1 is not invertible");
    Machine m;
    m.quandle = make_linear_rational({s});
    RegId x = m.add_register("x");
    RegId xu = m.add_register("xu");
    RegId u = m.add_register("u");
    m.components.push_back({false, {x, xu}});
    m.components.push_back({false, {u}});
    Agent a;
    a.op = linear_op(s);
    a.patients.push_back({{0, 0}, true});
    m.agents[u] = a;
    return m;
}

struct MarkovUnit {
    Machine machine;
    TransitionMatrix P;
};

// v1' = v1 <|_{s2} v2, v2' = v2 <|_{s1} v1; P = [[1-s2, s2], [s1, 1-s1]].
inline MarkovUnit markov_unit(const Rational& s1, const Rational& s2) {
    require_unit_param(s1);
    require_unit_param(s2);
    Machine m;
    m.quandle = make_linear_rational({s1, s2});
    RegId v1 = m.add_register("v1");
    RegId w1 = m.add_register("w1");
    RegId v2 = m.add_register("v2");
    RegId w2 = m.add_register("w2");
    m.components.push_back({false, {v1, w1}});
    m.components.push_back({false, {v2, w2}});
    Agent a2;
    a2.op = linear_op(s2);
    a2.patients.push_back({{0, 0}, true});
    m.agents[v2] = a2;
    Agent a1;
    a1.op = linear_op(s1);
    a1.patients.push_back({{1, 0}, true});
    m.agents[v1] = a1;
    TransitionMatrix P;
    P.p = RatMatrix(2, 2);
    P.p.at(0, 0) = Rational(1) - s2;
    P.p.at(0, 1) = s2;
    P.p.at(1, 0) = s1;
    P.p.at(1, 1) = Rational(1) - s1;
    return {std::move(m), P};
}

inline RatMatrix markov_p(const Rational& s1, const Rational& s2) {
    return markov_unit(s1, s2).P.p;
}

struct FeedForwardUnit {
    Machine machine;   // two fused copies; In = {a1,a2}, Out = {o1,o2}
    TransitionMatrix P, P0, P1;
};

// Two stacked copies with the first copy's strand-2 output acting across the
// block via <|_{s3}. One-step maps: v_{2i} -> P0 -> v_{2i+1} -> P1 -> v_{2i+2}.
inline FeedForwardUnit feed_forward_unit(const Rational& s1, const Rational& s2,
                                         const Rational& s3) {
    require_unit_param(s1);
    require_unit_param(s2);
    require_unit_param(s3);
    Machine m;
    m.quandle = make_linear_rational({s1, s2, s3});
    OpLabel op1 = linear_op(s1), op2 = linear_op(s2), op3 = linear_op(s3);
    RegId a1 = m.add_register("a1");
    RegId A = m.add_register("A");
    RegId m1 = m.add_register("m1");
    RegId B = m.add_register("B");
    RegId o1 = m.add_register("o1");
    RegId a2 = m.add_register("a2");
    RegId u3 = m.add_register("u3");  // the <|_{s3} agent, coloured v^2_{2i+1}
    RegId u2 = m.add_register("u2");  // same colour; copy-2's <|_{s2} agent
    RegId C = m.add_register("C");
    RegId o2 = m.add_register("o2");
    m.components.push_back({false, {a1, A, m1, B, o1}});
    m.components.push_back({false, {a2, u3, u2, C, o2}});
    // strand-1 edges: (a1,A) <|2 by a2; (A,m1) <|3 by u3 read m1->A;
    //                 (m1,B) <|2 by u2; (B,o1) <|3 by u3.
    // strand-2 edges: (a2,u3) <|1 by a1; (u3,u2) unacted; (u2,C) <|1 by m1;
    //                 (C,o2) <|3 by u3.
    {
        Agent ag;
        ag.op = op2;
        ag.patients.push_back({{0, 0}, true});
        m.agents[a2] = ag;
    }
    {
        Agent ag;
        ag.op = op1;
        ag.patients.push_back({{1, 0}, true});
        m.agents[a1] = ag;
    }
    {
        Agent ag;
        ag.op = op3;
        ag.patients.push_back({{0, 1}, false}); // m1 <|3 u3 = A
        ag.patients.push_back({{0, 3}, true});  // o1 = B <|3 u3
        ag.patients.push_back({{1, 3}, true});  // o2 = C <|3 u3
        m.agents[u3] = ag;
    }
    {
        Agent ag;
        ag.op = op2;
        ag.patients.push_back({{0, 2}, true}); // B = m1 <|2 u2
        m.agents[u2] = ag;
    }
    {
        Agent ag;
        ag.op = op1;
        ag.patients.push_back({{1, 2}, true}); // C = u2 <|1 m1
        m.agents[m1] = ag;
    }

    FeedForwardUnit out;
    out.machine = std::move(m);
    out.P.p = markov_p(s1, s2);
    Rational inv3 = Rational(1) / (Rational(1) - s3);
    out.P0.p = RatMatrix(2, 2);
    out.P0.p.at(0, 0) = (Rational(1) - s2 - s1 * s3) * inv3;
    out.P0.p.at(0, 1) = (s2 - s3 + s1 * s3) * inv3;
    out.P0.p.at(1, 0) = s1;
    out.P0.p.at(1, 1) = Rational(1) - s1;
    out.P1.p = RatMatrix(2, 2);
    out.P1.p.at(0, 0) = (Rational(1) - s2) * (Rational(1) - s3);
    out.P1.p.at(0, 1) = s2 * (Rational(1) - s3) + s3;
    out.P1.p.at(1, 0) = s1 * (Rational(1) - s3);
    out.P1.p.at(1, 1) = (Rational(1) - s1) * (Rational(1) - s3) + s3;
    return out;
}

struct FeedBackUnit {
    Machine machine;
    TransitionMatrix P, P1, P0dd, T;
    RatMatrix composite; // (I - P1 T)^-1 P1 P0''
};

// The final strand-2 output acts back across the first copy's intermediate
// registers: v_{2i+1} = P0'' v_{2i} + T v_{2i+2}.
inline FeedBackUnit feed_back_unit(const Rational& s1, const Rational& s2,
                                   const Rational& s3) {
    require_unit_param(s1);
    require_unit_param(s2);
    require_unit_param(s3);
    Machine m;
    m.quandle = make_linear_rational({s1, s2, s3});
    OpLabel op1 = linear_op(s1), op2 = linear_op(s2), op3 = linear_op(s3);
    RegId a1 = m.add_register("a1");
    RegId A = m.add_register("A");
    RegId m1 = m.add_register("m1");
    RegId B = m.add_register("B");
    RegId o1 = m.add_register("o1");
    RegId a2 = m.add_register("a2");
    RegId D = m.add_register("D");
    RegId u3 = m.add_register("u3");
    RegId u2 = m.add_register("u2");
    RegId C = m.add_register("C");
    RegId o2 = m.add_register("o2"); // also the feed-back agent
    m.components.push_back({false, {a1, A, m1, B, o1}});
    m.components.push_back({false, {a2, D, u3, u2, C, o2}});
    // strand-1: (a1,A) <|2 by a2; (A,m1) <|3 by o2 read m1->A;
    //           (m1,B) <|2 by u2; (B,o1) <|3 by u3.
    // strand-2: (a2,D) <|1 by a1; (D,u3) <|3 by o2 read u3->D;
    //           (u3,u2) unacted; (u2,C) <|1 by m1; (C,o2) <|3 by u3.
    {
        Agent ag;
        ag.op = op2;
        ag.patients.push_back({{0, 0}, true});
        m.agents[a2] = ag;
    }
    {
        Agent ag;
        ag.op = op1;
        ag.patients.push_back({{1, 0}, true});
        m.agents[a1] = ag;
    }
    {
        Agent ag;
        ag.op = op3;
        ag.patients.push_back({{0, 1}, false}); // m1 <|3 o2 = A
        ag.patients.push_back({{1, 1}, false}); // u3 <|3 o2 = D
        m.agents[o2] = ag;
    }
    {
        Agent ag;
        ag.op = op2;
        ag.patients.push_back({{0, 2}, true}); // B = m1 <|2 u2
        m.agents[u2] = ag;
    }
    {
        Agent ag;
        ag.op = op1;
        ag.patients.push_back({{1, 3}, true}); // C = u2 <|1 m1
        m.agents[m1] = ag;
    }
    {
        Agent ag;
        ag.op = op3;
        ag.patients.push_back({{0, 3}, true}); // o1 = B <|3 u3
        ag.patients.push_back({{1, 4}, true}); // o2 = C <|3 u3
        m.agents[u3] = ag;
    }

    FeedBackUnit out;
    out.machine = std::move(m);
    out.P.p = markov_p(s1, s2);
    Rational inv3 = Rational(1) / (Rational(1) - s3);
    out.P0dd.p = inv3 * out.P.p;
    out.P1.p = feed_forward_unit(s1, s2, s3).P1.p;
    out.T.p = RatMatrix(2, 2);
    out.T.p.at(0, 1) = -s3 * inv3;
    out.T.p.at(1, 1) = -s3 * inv3;
    RatMatrix i_minus = RatMatrix::identity(2) - out.P1.p * out.T.p;
    out.composite = invert_exact(i_minus) * out.P1.p * out.P0dd.p;
    return out;
}

// Kauffman's trefoil machine as a two-strand braid block over GF(p):
// (a, b) -> (b <| (a <| b), (a <| b) <| that). Closure is steady exactly
// when 3(a - b) = 0 in the field.
inline Machine kauffman_unit(int p) {
    Machine m;
    m.quandle = make_kauffman(p);
    OpLabel op;
    op.family = OpFamily::Kauffman;
    RegId a = m.add_register("a");
    RegId c = m.add_register("c");
    RegId o2 = m.add_register("o2");
    RegId b = m.add_register("b");
    RegId o1 = m.add_register("o1");
    m.components.push_back({false, {a, c, o2}});
    m.components.push_back({false, {b, o1}});
    {
        Agent ag;
        ag.op = op;
        ag.patients.push_back({{0, 0}, true}); // c = a <| b
        m.agents[b] = ag;
    }
    {
        Agent ag;
        ag.op = op;
        ag.patients.push_back({{1, 0}, true}); // o1 = b <| c
        m.agents[c] = ag;
    }
    {
        Agent ag;
        ag.op = op;
        ag.patients.push_back({{0, 1}, true}); // o2 = c <| o1
        m.agents[o1] = ag;
    }
    return m;
}

// --- iteration ------------------------------------------------------------------

struct IterationSpec {
    Machine unit;
    std::vector<std::pair<std::string, std::string>> pairs; // (out name, in name)
    int copies = 1;
    std::map<std::string, ColorValue> initial;               // seeds on copy 0
    std::vector<std::map<std::string, ColorValue>> per_copy; // free seeds, per copy
};

struct IterationResult {
    Machine chain;          // the concatenated machine, fully coloured
    ColoringResult coloring;
    // Boundary colours: step[i] maps the unit's In-register name to its colour
    // entering copy i; step[copies] holds the final Out colours keyed by the
    // unit's Out-register names.
    std::vector<std::map<std::string, ColorValue>> boundary;
};

inline std::string copy_suffix(int i) { return i == 0 ? "" : "." + std::to_string(i); }

inline IterationResult iterate(const IterationSpec& spec) {
    if (spec.copies < 1) throw std::invalid_argument("iterate: need at least one copy");
    IterationResult out;
    Machine chain = spec.unit;
    for (int i = 1; i < spec.copies; ++i) {
        Pairing pr;
        for (const auto& [oname, iname] : spec.pairs) {
            RegId t = *chain.find_register(oname + copy_suffix(i - 1));
            RegId b = *spec.unit.find_register(iname);
            pr.pairs.push_back({t, b});
        }
        chain = concatenate(chain, spec.unit, pr, copy_suffix(i));
    }

    std::map<RegId, ColorValue> seeds;
    for (const auto& [name, color] : spec.initial) {
        auto r = chain.find_register(name);
        if (!r) throw std::domain_error("iterate: unknown seed register '" + name + "'");
        seeds.emplace(*r, color);
    }
    for (int i = 0; i < static_cast<int>(spec.per_copy.size()) && i < spec.copies; ++i)
        for (const auto& [name, color] : spec.per_copy[i]) {
            auto r = chain.find_register(name + copy_suffix(i));
            if (!r) throw std::domain_error("iterate: unknown per-copy register '" + name + "'");
            seeds.emplace(*r, color);
        }

    out.coloring = solve_coloring(chain, seeds);
    out.chain = out.coloring.machine;

    if (out.coloring.status == ColoringResult::Status::Solved) {
        for (int i = 0; i <= spec.copies; ++i) {
            std::map<std::string, ColorValue> snap;
            for (const auto& [oname, iname] : spec.pairs) {
                std::string name;
                std::string key;
                if (i == 0) {
                    name = iname;       // entry of copy 0
                    key = iname;
                } else {
                    name = oname + copy_suffix(i - 1); // merged boundary register
                    key = (i == spec.copies) ? oname : iname;
                }
                auto r = out.chain.find_register(name);
                if (r && out.chain.colors[*r]) snap[key] = *out.chain.colors[*r];
            }
            out.boundary.push_back(std::move(snap));
        }
    }
    return out;
}

// --- steady states -----------------------------------------------------------

struct SteadyState {
    enum class Kind { Point, Set, Empty, NonConvergent } kind = Kind::Empty;
    Machine closed;                 // closure of the unit, coloured as far as known
    int nullity = 0;                // Set: dimension of the solution set
    std::map<RegId, ColorValue> particular;
    std::vector<std::map<RegId, ColorValue>> basis;
    std::string detail;
};

inline SteadyState steady_state(const Machine& unit,
                                const std::vector<std::pair<std::string, std::string>>& pairs,
                                const std::map<std::string, ColorValue>& seeds = {}) {
    Machine m = unit;
    for (const auto& [name, color] : seeds) {
        auto r = m.find_register(name);
        if (!r) throw std::domain_error("steady_state: unknown register '" + name + "'");
        m.colors[*r] = color;
    }
    Pairing pr;
    for (const auto& [oname, iname] : pairs)
        pr.pairs.push_back({*m.find_register(oname), *m.find_register(iname)});

    SteadyState st;
    Machine closed;
    try {
        closed = closure(m, pr);
    } catch (const std::domain_error& e) {
        st.kind = SteadyState::Kind::Empty;
        st.detail = e.what();
        return st;
    }
    auto res = solve_coloring(closed);
    st.closed = res.machine;
    switch (res.status) {
        case ColoringResult::Status::Solved: {
            st.kind = SteadyState::Kind::Point;
            for (int r = 0; r < st.closed.reg_count(); ++r)
                st.particular[r] = *st.closed.colors[r];
            return st;
        }
        case ColoringResult::Status::Inconsistent: {
            st.kind = SteadyState::Kind::Empty;
            st.detail = "closure constraints are inconsistent (register '" +
                        (res.conflict_reg >= 0 ? st.closed.names[res.conflict_reg] : "?") +
                        "': " + res.conflict_a + " vs " + res.conflict_b + ")";
            return st;
        }
        case ColoringResult::Status::Underdetermined: {
            if (res.solution_nullity > 0) {
                st.kind = SteadyState::Kind::Set;
                st.nullity = res.solution_nullity;
                st.particular = res.affine_particular;
                st.basis = res.affine_basis;
            } else {
                st.kind = SteadyState::Kind::NonConvergent;
                st.detail = "propagation stalled on a non-affine carrier";
            }
            return st;
        }
    }
    return st;
}

// Fixed-point fallback for carriers the affine solver cannot express: apply
// the unit map from v0 until In and Out agree to tol.
struct FixedPointResult {
    bool converged = false;
    int steps = 0;
    std::map<std::string, double> value;
};

inline FixedPointResult steady_state_fixed_point(
    const Machine& unit, const std::vector<std::pair<std::string, std::string>>& pairs,
    std::map<std::string, double> v0,
    const std::map<std::string, ColorValue>& controls = {},
    int max_steps = 100000, double tol = 1e-10) {
    FixedPointResult out;
    std::map<std::string, double> v = std::move(v0);
    for (int step = 0; step < max_steps; ++step) {
        std::map<RegId, ColorValue> seeds;
        for (const auto& [iname, val] : v) seeds.emplace(*unit.find_register(iname), val);
        for (const auto& [name, color] : controls) seeds.emplace(*unit.find_register(name), color);
        auto res = solve_coloring(unit, seeds);
        if (res.status != ColoringResult::Status::Solved) {
            out.converged = false;
            out.steps = step;
            return out;
        }
        double delta = 0.0;
        std::map<std::string, double> next;
        for (const auto& [oname, iname] : pairs) {
            double nv = std::get<double>(*res.machine.colors[*unit.find_register(oname)]);
            delta = std::max(delta, std::abs(nv - v[iname]));
            next[iname] = nv;
        }
        v = std::move(next);
        out.steps = step + 1;
        if (delta < tol) {
            out.converged = true;
            out.value = v;
            return out;
        }
    }
    return out;
}

} // namespace tanglekit::markov
