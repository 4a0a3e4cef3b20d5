#pragma once

// Entropy-coloured machines: fusion of entropies through linear updates,
// interaction and process capacities, the optimal/suboptimal/abstract
// classification, and the equivalent triple built from the locally optimal
// machine by explicit rewrite moves (equivalence holds by construction).

#include "search.hpp"

namespace tanglekit::info {

// Entropies in bits/symbol. t and s are the parameters that make the data
// strand's two crossings locally optimal:
//   t = (H(1)-H(1|2)) / (H(1)-H(2))
//   s = (H(1|2)-H(1|0,2)) / (H(1|2) - H(0) <|_t H(2))
struct EntropySpec {
    Rational H0, H1, H2, H1g2, H1g02;
    std::optional<Rational> H1g0; // true H(1|0), when the modeller knows it

    Rational t() const { return (H1 - H1g2) / (H1 - H2); }
    Rational h0t2() const {
        Rational tv = t();
        return (Rational(1) - tv) * H0 + tv * H2;
    }
    Rational s() const { return (H1g2 - H1g02) / (H1g2 - h0t2()); }

    // The orderings that force t, s into (0,1) plus conditioning-reduces-
    // entropy. Violations are reported, not thrown.
    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        auto nonneg = [&](const Rational& x, const char* n) {
            if (x < Rational(0)) v.push_back(std::string(n) + " must be nonnegative");
        };
        nonneg(H0, "H(0)");
        nonneg(H1, "H(1)");
        nonneg(H2, "H(2)");
        nonneg(H1g2, "H(1|2)");
        nonneg(H1g02, "H(1|0,2)");
        if (!(H1g2 > H2)) v.push_back("H(1|2) > H(2) required");
        if (!(H1 > H1g2)) v.push_back("H(1) > H(1|2) required");
        if (!(H1g02 < H1g2)) v.push_back("H(1|0,2) < H(1|2) required");
        if (v.empty() && !(H1g02 > h0t2()))
            v.push_back("H(1|0,2) > H(0) <|_t H(2) required");
        return v;
    }

    void require_valid() const {
        auto v = violations();
        if (!v.empty()) throw std::domain_error("entropy spec: " + v.front());
    }
};

inline Rational fuse_entropy(const Rational& h0, const Rational& h1, const Rational& s) {
    return (Rational(1) - s) * h0 + s * h1;
}
inline double fuse_entropy(double h0, double h1, double s) { return (1.0 - s) * h0 + s * h1; }

inline Rational interaction_capacity(const Rational& in, const Rational& out) { return in - out; }
inline double interaction_capacity(double in, double out) { return in - out; }

inline Rational mutual_information(const Rational& h1, const Rational& h1given) {
    if (h1given < Rational(0) || h1 < h1given)
        throw std::domain_error("mutual information needs H(1) >= H(1|.) >= 0");
    return h1 - h1given;
}

// ---------------------------------------------------------------------------

enum class InteractionClass { Optimal, Suboptimal, Abstract };

inline const char* interaction_class_name(InteractionClass c) {
    switch (c) {
        case InteractionClass::Optimal: return "optimal";
        case InteractionClass::Suboptimal: return "suboptimal";
        case InteractionClass::Abstract: return "abstract";
    }
    return "?";
}

struct InteractionReport {
    EdgeRef edge;
    RegId in = -1, out = -1, agent = -1;
    Rational capacity;
    InteractionClass cls = InteractionClass::Optimal;
    std::string note;
};

struct CapacityTriple {
    Rational t, s;
    Machine right;  // locally optimal, built directly
    Machine middle; // one R3 away, contains H(1) <|_s H(0)
    Machine left;   // one further poke, contains H(1) |>_s^-1 H(0)
    std::vector<MoveSite> right_to_middle;
    std::vector<MoveSite> middle_to_left;
};

// The locally optimal machine: agent H(2) fuses the data strand
// H(1) -> H(1|2) and the auxiliary strand H(0) -> H(0) <|_t H(2); the fused
// auxiliary then compresses the data strand to H(1|0,2).
inline Machine build_optimal_machine(const EntropySpec& spec) {
    spec.require_valid();
    Machine m;
    m.quandle = make_linear_rational({spec.t(), spec.s()});
    RegId h1 = m.add_register("H1", ColorValue(spec.H1));
    RegId h1g2 = m.add_register("H1g2", ColorValue(spec.H1g2));
    RegId h1g02 = m.add_register("H1g02", ColorValue(spec.H1g02));
    RegId h0 = m.add_register("H0", ColorValue(spec.H0));
    RegId h0t2 = m.add_register("H0t2", ColorValue(spec.h0t2()));
    RegId h2 = m.add_register("H2", ColorValue(spec.H2));
    m.components.push_back({false, {h1, h1g2, h1g02}}); // data strand
    m.components.push_back({false, {h0, h0t2}});        // auxiliary strand
    m.components.push_back({false, {h2}});
    Agent a2;
    a2.op = linear_op(spec.t());
    a2.patients.push_back({{0, 0}, true});
    a2.patients.push_back({{1, 0}, true});
    m.agents[h2] = a2;
    Agent af;
    af.op = linear_op(spec.s());
    af.patients.push_back({{0, 1}, true});
    m.agents[h0t2] = af;
    return m;
}

inline CapacityTriple build_capacity_triple(const EntropySpec& spec) {
    CapacityTriple out;
    out.t = spec.t();
    out.s = spec.s();
    out.right = build_optimal_machine(spec);

    // Slide the <|_s agent back across H(2): its register is the output end
    // of the carrier edge H0 -> H0t2.
    MoveSite r3;
    r3.kind = MoveKind::R3;
    r3.slider = *out.right.find_register("H0t2");
    r3.over = *out.right.find_register("H2");
    r3.carrier = {1, 0};
    r3.pairs = {{EdgeRef{0, 1}, EdgeRef{0, 0}}};
    auto applied = apply_move_ex(out.right, r3);
    out.middle = applied.machine;
    out.right_to_middle = {r3};
    {
        RegId pivot = *out.middle.find_register("H1g2"); // recoloured to H(1)<|_s H(0)
        out.middle.names[pivot] = "H1s0";
    }

    // Poke the front of the data strand under H(0) with the inverse first:
    // the new interior register carries H(1) |>_s^-1 H(0).
    MoveSite r2;
    r2.kind = MoveKind::R2Plus;
    r2.comp = 0;
    r2.pos = 0;
    r2.toward_low = false;
    r2.agent = *out.middle.find_register("H0");
    r2.op = linear_op(spec.s());
    r2.inverse_first = true;
    auto applied2 = apply_move_ex(out.middle, r2);
    out.left = applied2.machine;
    out.middle_to_left = {r2};
    {
        // Fresh registers: mid carries the inverse colour, far duplicates H(1).
        for (int r = 0; r < out.left.reg_count(); ++r) {
            if (out.left.names[r] == "r0") out.left.names[r] = "H1inv0";
            if (out.left.names[r] == "r1") out.left.names[r] = "H1in";
        }
    }
    return out;
}

// Classify every acted edge. Abstract when any participating colour leaves
// the admissible range; otherwise the spec's known conditional entropies
// decide optimal vs suboptimal, and interactions without a known conditional
// pass as optimal.
inline std::vector<InteractionReport> classify_interactions(
    const Machine& m, const EntropySpec& spec,
    const Rational& lo = Rational(0), const Rational& hi = Rational(1)) {
    std::vector<InteractionReport> out;
    std::map<std::pair<std::string, std::string>, Rational> conditional;
    conditional[{spec.H1.str(), spec.H2.str()}] = spec.H1g2;
    conditional[{spec.H1g2.str(), spec.h0t2().str()}] = spec.H1g02;
    if (spec.H1g0) conditional[{spec.H1.str(), spec.H0.str()}] = *spec.H1g0;

    auto ea = m.edge_agents();
    for (int c = 0; c < static_cast<int>(m.components.size()); ++c)
        for (int k = 0; k < m.components[c].edge_count(); ++k) {
            auto [u, patient] = ea[c][k];
            if (u < 0) continue;
            auto [a, b] = m.edge_ends({c, k});
            RegId in = patient->from_first ? a : b;
            RegId outr = patient->from_first ? b : a;
            if (m.agents.at(u).op.inverse) std::swap(in, outr);
            InteractionReport rep;
            rep.edge = {c, k};
            rep.in = in;
            rep.out = outr;
            rep.agent = u;
            Rational iv = std::get<Rational>(*m.colors[in]);
            Rational ov = std::get<Rational>(*m.colors[outr]);
            Rational av = std::get<Rational>(*m.colors[u]);
            rep.capacity = interaction_capacity(iv, ov);
            auto in_range = [&](const Rational& x) { return !(x < lo) && !(hi < x); };
            if (!in_range(iv) || !in_range(ov) || !in_range(av)) {
                rep.cls = InteractionClass::Abstract;
                rep.note = "colour outside [" + lo.str() + "," + hi.str() + "]";
            } else {
                auto it = conditional.find({iv.str(), av.str()});
                if (it == conditional.end()) {
                    rep.cls = InteractionClass::Optimal;
                } else if (ov == it->second) {
                    rep.cls = InteractionClass::Optimal;
                } else {
                    rep.cls = InteractionClass::Suboptimal;
                    rep.note = "output " + ov.str() + " differs from conditional entropy " +
                               it->second.str();
                }
            }
            out.push_back(rep);
        }
    return out;
}

// Per path process: initial colour minus terminal colour, as a sorted
// multiset (exact arithmetic).
inline std::vector<Rational> global_capacity(const Machine& m) {
    std::vector<Rational> caps;
    for (const auto& c : m.components) {
        if (c.cycle) continue;
        caps.push_back(std::get<Rational>(*m.colors[c.regs.front()]) -
                       std::get<Rational>(*m.colors[c.regs.back()]));
    }
    std::sort(caps.begin(), caps.end());
    return caps;
}

} // namespace tanglekit::info
