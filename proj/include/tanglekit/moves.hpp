#pragma once

// Reidemeister rewriting on the Gauss-diagram presentation of machines.
//
//   R1+/R1-   kink insertion/removal: an acted edge whose agent is one of
//             its own endpoints (colours forced equal by idempotence).
//   R2+/R2-   poke/retraction: two adjacent edges under one agent with
//             cancelling exponents; the middle register is not an agent.
//   R3        sliding an agent, with its whole patient set, across another
//             agent it passes under. Valid for any direction flags as long
//             as every patient's companion crossing under the over-agent
//             carries the same exponent as the slider's own crossing.
//   Stab+/-   marking/unmarking a register as an agent that acts on nothing.
//
// Moves never create or destroy unacted edges; canonical keys contract them
// so that concatenation seams do not distinguish otherwise-equal machines.

#include <cstdint>
#include <deque>
#include <functional>
#include <numeric>
#include <unordered_map>

#include "machine.hpp"

namespace tanglekit {

enum class MoveKind { R1Plus, R1Minus, R2Plus, R2Minus, R3, StabPlus, StabMinus };

inline const char* move_kind_name(MoveKind k) {
    switch (k) {
        case MoveKind::R1Plus: return "R1+";
        case MoveKind::R1Minus: return "R1-";
        case MoveKind::R2Plus: return "R2+";
        case MoveKind::R2Minus: return "R2-";
        case MoveKind::R3: return "R3";
        case MoveKind::StabPlus: return "Stab+";
        case MoveKind::StabMinus: return "Stab-";
    }
    return "?";
}

struct MoveSite {
    MoveKind kind = MoveKind::R3;
    uint64_t fingerprint = 0;

    // R1+: anchor register, insert side, who acts, direction flag, op.
    // Stab+/- reuse `anchor` (and `op` for Stab+).
    RegId anchor = -1;
    bool insert_after = true;
    bool agent_new = false;
    bool from_first = true; // kink relation read anchor -> new register
    OpLabel op;

    // R1-: the kink edge.
    EdgeRef edge;

    // R2+: insertion gap and pattern orientation.
    int comp = -1;
    int pos = 0;
    bool toward_low = true;
    RegId agent = -1;
    bool inverse_first = false;

    // R2-: middle register of the retraction pattern.
    RegId middle = -1;

    // R3: slider h crossing under `over` w via carrier edge c; one
    // (patient edge of h, companion edge of w) pair per patient.
    RegId slider = -1, over = -1;
    EdgeRef carrier;
    std::vector<std::pair<EdgeRef, EdgeRef>> pairs;
};

// Cheap structural hash for stale-site detection.
inline uint64_t machine_fingerprint(const Machine& m) {
    std::ostringstream os;
    os << m.quandle.key() << "|";
    for (const auto& c : m.components) {
        os << (c.cycle ? "C" : "P");
        for (RegId r : c.regs)
            os << r << (m.colors[r] ? color_key(*m.colors[r]) : "_") << ";";
    }
    for (const auto& [u, ag] : m.agents) {
        os << "A" << u << ag.op.key();
        for (const auto& p : ag.patients)
            os << "(" << p.edge.comp << "," << p.edge.idx << "," << p.from_first << ")";
    }
    return std::hash<std::string>{}(os.str());
}

namespace detail {

inline PatientRef make_patient(EdgeRef e, const OpLabel& op, int exp_first_to_second) {
    PatientRef p;
    p.edge = e;
    int isign = op.inverse ? -1 : 1;
    p.from_first = (exp_first_to_second * isign) > 0;
    return p;
}

// Exponent of the base operation reading `from` -> other endpoint.
inline int exponent_from(const Machine& m, RegId u, const PatientRef& p, RegId from) {
    auto [a, b] = m.edge_ends(p.edge);
    int e = Machine::exponent_first_to_second(m.agents.at(u).op, p);
    if (from == a) return e;
    if (from == b) return -e;
    throw std::logic_error("exponent_from: register not on edge");
}

// Rotate a cycle component left by r; patient edge indices follow.
inline void rotate_cycle(Machine& m, int comp, int r) {
    Component& c = m.components[comp];
    const int n = static_cast<int>(c.regs.size());
    if (!c.cycle || n == 0) return;
    r = ((r % n) + n) % n;
    if (r == 0) return;
    std::rotate(c.regs.begin(), c.regs.begin() + r, c.regs.end());
    for (auto& [u, ag] : m.agents)
        for (auto& p : ag.patients)
            if (p.edge.comp == comp) p.edge.idx = ((p.edge.idx - r) % n + n) % n;
}

inline void apply_edgemap(Machine& m,
                          const std::map<std::pair<int, int>, std::pair<int, int>>& edgemap) {
    std::vector<RegId> id(m.names.size());
    std::iota(id.begin(), id.end(), 0);
    remap_machine(m, id, edgemap);
}

// Merge register `removed` into `survivor` (equal colours assumed); agent
// roles merge when the operations agree, otherwise throws.
inline void merge_register_into(Machine& m, RegId removed, RegId survivor) {
    std::vector<RegId> regmap(m.names.size());
    std::iota(regmap.begin(), regmap.end(), 0);
    regmap[removed] = survivor;
    remap_machine(m, regmap, {});
}

inline std::vector<OpLabel> op_palette(const Machine& m) {
    std::vector<OpLabel> out = enumerate_ops(m.quandle);
    for (const auto& [u, ag] : m.agents) {
        bool seen = false;
        for (const auto& o : out)
            if (o == ag.op) { seen = true; break; }
        if (!seen) out.push_back(ag.op);
    }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Invariant profile: endpoint colours per path process plus component data.
// Every move in this module preserves it exactly; a mismatch certifies
// non-equivalence.
// ---------------------------------------------------------------------------

struct InvariantProfile {
    int path_count = 0, cycle_count = 0;
    std::vector<std::pair<std::string, std::string>> path_endpoints; // sorted
    // Descriptive only: a poke on a cycle introduces new colours, so cycle
    // colour sets are not preserved by R1+/R2+/R3 and must stay out of the
    // refutation certificate to keep it sound.
    std::vector<std::string> cycle_colorsets; // sorted

    friend bool operator==(const InvariantProfile& a, const InvariantProfile& b) {
        return a.path_count == b.path_count && a.cycle_count == b.cycle_count &&
               a.path_endpoints == b.path_endpoints;
    }

    std::string str() const {
        std::ostringstream os;
        os << "paths=" << path_count << " cycles=" << cycle_count << " ends={";
        for (const auto& [a, b] : path_endpoints) os << "(" << a << "->" << b << ")";
        os << "} cyclesets={";
        for (const auto& s : cycle_colorsets) os << "[" << s << "]";
        os << "}";
        return os.str();
    }
};

inline InvariantProfile invariant_profile(const Machine& m) {
    InvariantProfile p;
    for (const auto& c : m.components) {
        auto col = [&](RegId r) {
            if (!m.colors[r]) throw std::domain_error("invariant_profile: uncoloured register");
            return color_key(*m.colors[r]);
        };
        if (c.cycle) {
            ++p.cycle_count;
            std::vector<std::string> cs;
            for (RegId r : c.regs) cs.push_back(col(r));
            std::sort(cs.begin(), cs.end());
            cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
            std::string joined;
            for (auto& s : cs) joined += s + "|";
            p.cycle_colorsets.push_back(joined);
        } else {
            ++p.path_count;
            p.path_endpoints.emplace_back(col(c.regs.front()), col(c.regs.back()));
        }
    }
    std::sort(p.path_endpoints.begin(), p.path_endpoints.end());
    std::sort(p.cycle_colorsets.begin(), p.cycle_colorsets.end());
    return p;
}

// ---------------------------------------------------------------------------
// Move enumeration
// ---------------------------------------------------------------------------

inline std::vector<MoveSite> enumerate_moves(const Machine& m) {
    std::vector<MoveSite> sites;
    uint64_t fp = machine_fingerprint(m);
    auto ea = m.edge_agents();
    auto palette = detail::op_palette(m);

    auto add = [&](MoveSite s) {
        s.fingerprint = fp;
        sites.push_back(std::move(s));
    };

    // ---- R1- : kink edges (agent is an endpoint of its own patient edge).
    for (int c = 0; c < static_cast<int>(m.components.size()); ++c)
        for (int k = 0; k < m.components[c].edge_count(); ++k) {
            auto [u, patient] = ea[c][k];
            if (u < 0) continue;
            auto [a, b] = m.edge_ends({c, k});
            if (a == b) continue; // self-loops stay out of kink rewriting
            if (u != a && u != b) continue;
            RegId v = (u == a) ? b : a;
            if (m.is_agent(v)) continue; // contraction keeps the agent side
            MoveSite s;
            s.kind = MoveKind::R1Minus;
            s.edge = {c, k};
            add(s);
        }

    // ---- R1+ : insert a kink next to any register.
    for (int r = 0; r < m.reg_count(); ++r)
        for (bool after : {true, false})
            for (bool agent_new : {false, true})
                for (bool from_first : {true, false})
                    for (const auto& op : palette) {
                        if (m.is_agent(r)) {
                            if (agent_new) continue; // keep the kink undoable
                            if (!(m.agents.at(r).op == op))
                                continue; // an agent register keeps its single op
                        }
                        MoveSite s;
                        s.kind = MoveKind::R1Plus;
                        s.anchor = r;
                        s.insert_after = after;
                        s.agent_new = agent_new;
                        s.from_first = from_first;
                        s.op = op;
                        add(s);
                    }

    // ---- R2- : cancelling adjacent crossings under one agent.
    for (const auto& [u, ag] : m.agents) {
        for (size_t i = 0; i < ag.patients.size(); ++i)
            for (size_t j = 0; j < ag.patients.size(); ++j) {
                if (i == j) continue;
                const auto& p1 = ag.patients[i];
                const auto& p2 = ag.patients[j];
                if (p1.edge.comp != p2.edge.comp) continue;
                const Component& comp = m.components[p1.edge.comp];
                const int n = static_cast<int>(comp.regs.size());
                int next = comp.cycle ? (p1.edge.idx + 1) % n : p1.edge.idx + 1;
                if (p2.edge.idx != next || p1.edge.idx == p2.edge.idx) continue;
                auto [a, b1] = m.edge_ends(p1.edge);
                auto [b2, cc] = m.edge_ends(p2.edge);
                if (b1 != b2 || a == b1 || b2 == cc) continue;
                RegId mid = b1;
                if (m.is_agent(mid)) continue; // the middle register must not act
                if (detail::exponent_from(m, u, p1, a) != -detail::exponent_from(m, u, p2, mid))
                    continue;
                if (a != cc && m.is_agent(a) && m.is_agent(cc))
                    continue; // cannot contract two distinct agent roles together
                MoveSite s;
                s.kind = MoveKind::R2Minus;
                s.middle = mid;
                add(s);
            }
    }

    // ---- R2+ : poke any gap under any register.
    for (int c = 0; c < static_cast<int>(m.components.size()); ++c) {
        const Component& comp = m.components[c];
        const int n = static_cast<int>(comp.regs.size());
        int pos_max = comp.cycle ? n - 1 : n;
        for (int pos = 0; pos <= pos_max; ++pos)
            for (bool toward_low : {true, false}) {
                if (!comp.cycle) {
                    if (toward_low && pos == 0) continue;  // no low neighbour
                    if (!toward_low && pos == n) continue; // no high neighbour
                }
                for (int u = 0; u < m.reg_count(); ++u)
                    for (bool inv_first : {false, true}) {
                        std::vector<OpLabel> ops;
                        if (m.is_agent(u)) ops = {m.agents.at(u).op};
                        else ops = palette;
                        for (const auto& op : ops) {
                            MoveSite s;
                            s.kind = MoveKind::R2Plus;
                            s.comp = c;
                            s.pos = pos;
                            s.toward_low = toward_low;
                            s.agent = u;
                            s.op = op;
                            s.inverse_first = inv_first;
                            add(s);
                        }
                    }
            }
    }

    // ---- R3 : slide an agent across an agent it passes under.
    for (const auto& [w, wag] : m.agents) {
        for (const auto& cpat : wag.patients) {
            auto [e1, e2] = m.edge_ends(cpat.edge);
            if (e1 == e2) continue;
            for (RegId h : {e1, e2}) {
                RegId hprime = (h == e1) ? e2 : e1;
                if (!m.is_agent(h) || h == w || hprime == w) continue;
                if (m.is_agent(hprime) && !(m.agents.at(hprime).op == m.agents.at(h).op))
                    continue;
                int eps = detail::exponent_from(m, w, cpat, h);
                const auto& hag = m.agents.at(h);

                // Companion candidates per patient of the slider.
                std::vector<std::vector<std::pair<EdgeRef, EdgeRef>>> choices;
                bool feasible = true;
                for (const auto& ap : hag.patients) {
                    std::vector<std::pair<EdgeRef, EdgeRef>> cand;
                    auto [pa, pb] = m.edge_ends(ap.edge);
                    std::vector<RegId> pivots = (pa == pb) ? std::vector<RegId>{}
                                                           : std::vector<RegId>{pa, pb};
                    for (RegId pivot : pivots) {
                        if (m.is_agent(pivot) || pivot == h || pivot == hprime || pivot == w)
                            continue;
                        for (const auto& bp : wag.patients) {
                            if (bp.edge == cpat.edge || bp.edge == ap.edge) continue;
                            auto [ba, bb] = m.edge_ends(bp.edge);
                            if (ba == bb) continue;
                            if (ba != pivot && bb != pivot) continue;
                            if (detail::exponent_from(m, w, bp, pivot) != eps) continue;
                            cand.push_back({ap.edge, bp.edge});
                        }
                    }
                    if (cand.empty()) { feasible = false; break; }
                    choices.push_back(std::move(cand));
                }
                if (!feasible) continue;

                // All assignments with pairwise-distinct companion edges.
                std::vector<std::pair<EdgeRef, EdgeRef>> acc;
                std::function<void(size_t)> rec = [&](size_t i) {
                    if (i == choices.size()) {
                        MoveSite s;
                        s.kind = MoveKind::R3;
                        s.slider = h;
                        s.over = w;
                        s.carrier = cpat.edge;
                        s.pairs = acc;
                        add(s);
                        return;
                    }
                    for (const auto& pr : choices[i]) {
                        bool used = false;
                        for (const auto& got : acc)
                            if (got.second == pr.second) { used = true; break; }
                        if (used) continue;
                        acc.push_back(pr);
                        rec(i + 1);
                        acc.pop_back();
                    }
                };
                rec(0);
            }
        }
    }

    // ---- Stab- / Stab+
    for (const auto& [u, ag] : m.agents)
        if (ag.patients.empty()) {
            MoveSite s;
            s.kind = MoveKind::StabMinus;
            s.anchor = u;
            add(s);
        }
    for (int r = 0; r < m.reg_count(); ++r) {
        if (m.is_agent(r)) continue;
        for (const auto& op : palette) {
            MoveSite s;
            s.kind = MoveKind::StabPlus;
            s.anchor = r;
            s.op = op;
            add(s);
        }
    }
    return sites;
}

// ---------------------------------------------------------------------------
// Move application
// ---------------------------------------------------------------------------

struct AppliedMove {
    Machine machine;
    MoveSite inverse; // anchored on `machine`
};

namespace detail {

inline void require_colored(const Machine& m) {
    for (int r = 0; r < m.reg_count(); ++r)
        if (!m.colors[r]) throw std::domain_error("move engine requires a fully coloured machine");
}

inline void attach_patient(Machine& m, RegId agent, const OpLabel& op, const PatientRef& pat) {
    auto it = m.agents.find(agent);
    if (it == m.agents.end()) {
        Agent ag;
        ag.op = op;
        ag.patients.push_back(pat);
        m.agents[agent] = std::move(ag);
    } else {
        if (!(it->second.op == op))
            throw std::domain_error("operation conflicts with the register's existing agency");
        it->second.patients.push_back(pat);
    }
}

inline AppliedMove apply_r1_plus(const Machine& m, const MoveSite& s) {
    Machine out = m;
    if (s.anchor < 0 || s.anchor >= out.reg_count())
        throw std::domain_error("R1+: bad anchor");
    auto loc = out.locate();
    auto [c, p] = loc.at(s.anchor);
    if (c < 0) throw std::domain_error("R1+: anchor not on any component");
    if (s.agent_new && out.is_agent(s.anchor))
        throw std::domain_error("R1+: new-register agency beside an agent anchor is unsupported");
    bool cycle = out.components[c].cycle;
    RegId nu = out.add_register(out.fresh_name(), out.colors[s.anchor]);

    std::map<std::pair<int, int>, std::pair<int, int>> edgemap;
    EdgeRef kink;
    if (!cycle) {
        const int ecount = out.components[c].edge_count();
        for (int k = p; k < ecount; ++k) edgemap[{c, k}] = {c, k + 1};
        int insert_pos = s.insert_after ? p + 1 : p;
        out.components[c].regs.insert(out.components[c].regs.begin() + insert_pos, nu);
        kink = {c, p};
    } else {
        const int n = static_cast<int>(out.components[c].regs.size());
        if (s.insert_after) {
            rotate_cycle(out, c, p); // anchor -> position 0
            for (int k = 0; k < n; ++k) edgemap[{c, k}] = {c, k + 1};
            kink = {c, 0};
        } else {
            rotate_cycle(out, c, (p - 1 + n) % n); // predecessor -> position 0
            for (int k = 1; k < n; ++k) edgemap[{c, k}] = {c, k + 1};
            kink = {c, 1};
        }
        out.components[c].regs.insert(out.components[c].regs.begin() + 1, nu);
    }
    apply_edgemap(out, edgemap);

    auto [fa, fb] = out.edge_ends(kink);
    bool ff = s.from_first; // defined reading anchor -> new register
    if (fa == nu) ff = !ff;
    PatientRef pat;
    pat.edge = kink;
    pat.from_first = ff;
    attach_patient(out, s.agent_new ? nu : s.anchor, s.op, pat);

    MoveSite inv;
    inv.kind = MoveKind::R1Minus;
    inv.edge = kink;
    inv.fingerprint = machine_fingerprint(out);
    return {std::move(out), inv};
}

inline AppliedMove apply_r1_minus(const Machine& m, const MoveSite& s) {
    Machine out = m;
    auto ea = out.edge_agents();
    if (s.edge.comp < 0 || s.edge.comp >= static_cast<int>(out.components.size()) ||
        s.edge.idx < 0 || s.edge.idx >= out.components[s.edge.comp].edge_count())
        throw std::domain_error("R1-: bad edge");
    auto [u, patient] = ea.at(s.edge.comp).at(s.edge.idx);
    auto [a, b] = out.edge_ends(s.edge);
    if (u < 0 || (u != a && u != b) || a == b)
        throw std::domain_error("R1-: edge is not a kink");
    RegId v = (u == a) ? b : a;
    if (out.is_agent(v)) throw std::domain_error("R1-: removed end is an agent");

    bool removed_is_second = (v == b);
    bool fwd_u_to_v = (u == a) ? patient->from_first : !patient->from_first;
    OpLabel op = out.agents.at(u).op;
    std::string u_name = out.names[u];

    Agent& ag = out.agents.at(u);
    ag.patients.erase(std::remove_if(ag.patients.begin(), ag.patients.end(),
                                     [&](const PatientRef& p) { return p.edge == s.edge; }),
                      ag.patients.end());
    if (ag.patients.empty()) out.agents.erase(u);

    int c = s.edge.comp;
    int k = s.edge.idx;
    if (out.components[c].cycle) {
        rotate_cycle(out, c, k);
        k = 0;
    }
    std::map<std::pair<int, int>, std::pair<int, int>> edgemap;
    for (int j = 0; j < out.components[c].edge_count(); ++j) {
        if (j == k) continue;
        edgemap[{c, j}] = {c, j > k ? j - 1 : j};
    }
    merge_register_into(out, v, u);
    out.components[c].regs.erase(out.components[c].regs.begin() + (removed_is_second ? k + 1 : k));
    apply_edgemap(out, edgemap);
    compact_registers(out);

    MoveSite inv;
    inv.kind = MoveKind::R1Plus;
    inv.anchor = *out.find_register(u_name);
    inv.insert_after = removed_is_second;
    inv.agent_new = false;
    inv.from_first = fwd_u_to_v;
    inv.op = op;
    inv.fingerprint = machine_fingerprint(out);
    return {std::move(out), inv};
}

inline AppliedMove apply_r2_plus(const Machine& m, const MoveSite& s) {
    Machine out = m;
    if (s.comp < 0 || s.comp >= static_cast<int>(out.components.size()))
        throw std::domain_error("R2+: bad component");
    if (s.agent < 0 || s.agent >= out.reg_count())
        throw std::domain_error("R2+: bad agent");
    const bool cycle = out.components[s.comp].cycle;
    const int c = s.comp;
    int pos = s.pos;
    int n = static_cast<int>(out.components[c].regs.size());
    if (cycle) {
        rotate_cycle(out, c, ((pos % n) + n) % n); // gap -> wrap position
    } else if (pos < 0 || pos > n) {
        throw std::domain_error("R2+: bad position");
    }

    RegId nbr;
    if (s.toward_low) {
        if (!cycle && pos == 0) throw std::domain_error("R2+: no low neighbour");
        nbr = cycle ? out.components[c].regs[n - 1] : out.components[c].regs[pos - 1];
    } else {
        if (!cycle && pos == n) throw std::domain_error("R2+: no high neighbour");
        nbr = cycle ? out.components[c].regs[0] : out.components[c].regs[pos];
    }
    const OpLabel& op = s.op;
    if (out.is_agent(s.agent) && !(out.agents.at(s.agent).op == op))
        throw std::domain_error("R2+: op conflicts with existing agent");
    int eps = s.inverse_first ? -1 : 1;
    ColorValue base = *out.colors[nbr];
    ColorValue mid_color = (eps > 0) ? op_apply(out.quandle, op, base, *out.colors[s.agent])
                                     : op_invert(out.quandle, op, base, *out.colors[s.agent]);

    RegId mid = out.add_register(out.fresh_name(), mid_color);
    RegId far = out.add_register(out.fresh_name(), base);
    std::vector<RegId> ins = s.toward_low ? std::vector<RegId>{mid, far}
                                          : std::vector<RegId>{far, mid};

    std::map<std::pair<int, int>, std::pair<int, int>> edgemap;
    if (!cycle) {
        int shift_from = s.toward_low ? pos - 1 : pos;
        for (int k = 0; k < out.components[c].edge_count(); ++k)
            if (k >= shift_from) edgemap[{c, k}] = {c, k + 2};
        out.components[c].regs.insert(out.components[c].regs.begin() + pos,
                                      ins.begin(), ins.end());
    } else {
        // Gap is at the wrap; the pair lands at the front of the sequence.
        for (int k = 0; k < n; ++k) {
            if (s.toward_low && k == n - 1) edgemap[{c, k}] = {c, 1};
            else edgemap[{c, k}] = {c, k + 2};
        }
        out.components[c].regs.insert(out.components[c].regs.begin(), ins.begin(), ins.end());
    }
    apply_edgemap(out, edgemap);

    // Locate the two pattern edges around the middle register.
    auto loc = out.locate();
    int pm = loc[mid].second;
    const int n2 = static_cast<int>(out.components[c].regs.size());
    int e_outer = s.toward_low ? (pm - 1 + n2) % n2 : pm % n2;
    int e_inner = s.toward_low ? pm % n2 : (pm - 1 + n2) % n2;

    auto add_pat = [&](int eidx, RegId from, int exp_from) {
        EdgeRef e{c, eidx};
        auto [x, y] = out.edge_ends(e);
        int exp_first = (x == from) ? exp_from : -exp_from;
        attach_patient(out, s.agent, op, make_patient(e, op, exp_first));
    };
    add_pat(e_outer, nbr, eps); // reading nbr -> mid
    add_pat(e_inner, far, eps); // reading far -> mid (cancelling)

    MoveSite inv;
    inv.kind = MoveKind::R2Minus;
    inv.middle = mid;
    inv.fingerprint = machine_fingerprint(out);
    return {std::move(out), inv};
}

inline AppliedMove apply_r2_minus(const Machine& m, const MoveSite& s) {
    Machine out = m;
    if (s.middle < 0 || s.middle >= out.reg_count())
        throw std::domain_error("R2-: bad middle register");
    if (out.is_agent(s.middle)) throw std::domain_error("R2-: middle register is an agent");
    auto loc = out.locate();
    auto [c, p] = loc[s.middle];
    if (c < 0) throw std::domain_error("R2-: middle register not found");
    bool cycle = out.components[c].cycle;
    int n = static_cast<int>(out.components[c].regs.size());
    if (!cycle && (p == 0 || p == n - 1))
        throw std::domain_error("R2-: middle register is an endpoint");
    if (cycle) {
        if (n < 2) throw std::domain_error("R2-: degenerate cycle");
        rotate_cycle(out, c, (p - 1 + n) % n); // pattern occupies positions 0,1,2
        p = 1;
    }
    RegId a = out.components[c].regs[p - 1];
    RegId b = s.middle;
    RegId far = out.components[c].regs[(p + 1) % n];
    EdgeRef e1{c, p - 1}, e2{c, p};
    auto ea = out.edge_agents();
    auto [u1, p1] = ea[c][e1.idx];
    auto [u2, p2] = ea[c][e2.idx];
    if (u1 < 0 || u1 != u2) throw std::domain_error("R2-: edges not under a single agent");
    int eps = exponent_from(out, u1, *p1, a);
    if (eps != -exponent_from(out, u2, *p2, b))
        throw std::domain_error("R2-: exponents do not cancel");
    // Contraction keeps the agent side when exactly one outer register acts.
    bool keep_far = (a != far) && out.is_agent(far);
    if (keep_far && out.is_agent(a))
        throw std::domain_error("R2-: both outer registers are agents");

    std::string survivor_name = out.names[keep_far ? far : a];
    std::string agent_name = out.names[u1];
    OpLabel op = out.agents.at(u1).op;

    Agent& ag = out.agents.at(u1);
    ag.patients.erase(std::remove_if(ag.patients.begin(), ag.patients.end(),
                                     [&](const PatientRef& q) {
                                         return q.edge == e1 || q.edge == e2;
                                     }),
                      ag.patients.end());
    if (ag.patients.empty()) out.agents.erase(u1);

    if (cycle && n == 2) {
        // Closed poke: the 2-cycle collapses to a single register whose one
        // self-edge (now unacted) keeps the component a cycle.
        out.components[c].regs.erase(out.components[c].regs.begin() + 1);
        compact_registers(out);
    } else {
        std::map<std::pair<int, int>, std::pair<int, int>> edgemap;
        for (int k = 0; k < out.components[c].edge_count(); ++k) {
            if (k == e1.idx || k == e2.idx) continue;
            edgemap[{c, k}] = {c, k > e2.idx ? k - 2 : k};
        }
        if (keep_far) {
            merge_register_into(out, a, far);
            out.components[c].regs.erase(out.components[c].regs.begin() + p - 1,
                                         out.components[c].regs.begin() + p + 1);
        } else {
            if (far != a) merge_register_into(out, far, a);
            out.components[c].regs.erase(out.components[c].regs.begin() + p,
                                         out.components[c].regs.begin() + p + 2);
        }
        apply_edgemap(out, edgemap);
        compact_registers(out);
    }

    MoveSite inv;
    inv.kind = MoveKind::R2Plus;
    RegId anchor = *out.find_register(survivor_name);
    auto loc2 = out.locate();
    inv.comp = loc2[anchor].first;
    if (keep_far) {
        inv.pos = loc2[anchor].second;
        inv.toward_low = false;
    } else {
        inv.pos = loc2[anchor].second + 1;
        if (out.components[inv.comp].cycle)
            inv.pos %= static_cast<int>(out.components[inv.comp].regs.size());
        inv.toward_low = true;
    }
    inv.agent = *out.find_register(agent_name);
    inv.op = op;
    inv.inverse_first = eps < 0;
    inv.fingerprint = machine_fingerprint(out);
    return {std::move(out), inv};
}

inline AppliedMove apply_r3(const Machine& m, const MoveSite& s) {
    Machine out = m;
    if (!out.is_agent(s.slider) || !out.is_agent(s.over))
        throw std::domain_error("R3: slider/over must be agents");
    auto [ca, cb] = out.edge_ends(s.carrier);
    RegId h = s.slider, w = s.over;
    RegId hprime = (h == ca) ? cb : (h == cb ? ca : -1);
    if (hprime < 0 || hprime == h) throw std::domain_error("R3: slider not on carrier edge");
    if (out.is_agent(hprime) && !(out.agents.at(hprime).op == out.agents.at(h).op))
        throw std::domain_error("R3: target register carries a different operation");

    const PatientRef* cpat = nullptr;
    for (const auto& p : out.agents.at(w).patients)
        if (p.edge == s.carrier) cpat = &p;
    if (!cpat) throw std::domain_error("R3: carrier edge not acted by over-agent");
    int eps = exponent_from(out, w, *cpat, h);

    OpLabel hop = out.agents.at(h).op;
    OpLabel wop = out.agents.at(w).op;
    if (s.pairs.size() != out.agents.at(h).patients.size())
        throw std::domain_error("R3: every patient of the slider must participate");

    struct Plan {
        EdgeRef a, b;
        RegId far_a, pivot, far_b;
        int alpha; // exponent of a reading far_a -> pivot
    };
    std::vector<Plan> plans;
    for (const auto& [ae, be] : s.pairs) {
        const PatientRef* ap = nullptr;
        const PatientRef* bp = nullptr;
        for (const auto& p : out.agents.at(h).patients)
            if (p.edge == ae) ap = &p;
        for (const auto& p : out.agents.at(w).patients)
            if (p.edge == be) bp = &p;
        if (!ap || !bp) throw std::domain_error("R3: stale pair references");
        auto [a1, a2] = out.edge_ends(ae);
        auto [b1, b2] = out.edge_ends(be);
        RegId pivot = (a1 == b1 || a1 == b2) ? a1 : a2;
        if (pivot != b1 && pivot != b2)
            throw std::domain_error("R3: pair edges do not share a register");
        RegId far_a = (pivot == a1) ? a2 : a1;
        RegId far_b = (pivot == b1) ? b2 : b1;
        if (out.is_agent(pivot)) throw std::domain_error("R3: pivot register is an agent");
        if (exponent_from(out, w, *bp, pivot) != eps)
            throw std::domain_error("R3: companion exponent mismatch");
        plans.push_back({ae, be, far_a, pivot, far_b, exponent_from(out, h, *ap, far_a)});
    }

    for (const auto& pl : plans) {
        out.colors[pl.pivot] = (eps > 0)
            ? op_apply(out.quandle, wop, *out.colors[pl.far_a], *out.colors[w])
            : op_invert(out.quandle, wop, *out.colors[pl.far_a], *out.colors[w]);
    }
    auto drop_edge = [](std::vector<PatientRef>& v, const EdgeRef& e) {
        v.erase(std::remove_if(v.begin(), v.end(),
                               [&](const PatientRef& p) { return p.edge == e; }),
                v.end());
    };
    std::vector<PatientRef> to_hprime;
    for (const auto& pl : plans) {
        drop_edge(out.agents.at(h).patients, pl.a);
        drop_edge(out.agents.at(w).patients, pl.b);
        auto [x, y] = out.edge_ends(pl.a);
        out.agents.at(w).patients.push_back(
            make_patient(pl.a, wop, x == pl.far_a ? eps : -eps));
        auto [p2, q2] = out.edge_ends(pl.b);
        to_hprime.push_back(make_patient(pl.b, hop, p2 == pl.pivot ? pl.alpha : -pl.alpha));
    }
    out.agents.erase(h);
    for (const auto& pat : to_hprime) attach_patient(out, hprime, hop, pat);
    if (to_hprime.empty()) {
        // k = 0 slide: agency transfers with an empty patient set.
        Agent ag;
        ag.op = hop;
        auto it = out.agents.find(hprime);
        if (it == out.agents.end()) out.agents[hprime] = ag;
        else if (!(it->second.op == hop))
            throw std::domain_error("R3: target register carries a different operation");
    }

    MoveSite inv;
    inv.kind = MoveKind::R3;
    inv.slider = hprime;
    inv.over = w;
    inv.carrier = s.carrier;
    for (const auto& pl : plans) inv.pairs.push_back({pl.b, pl.a});
    inv.fingerprint = machine_fingerprint(out);
    return {std::move(out), inv};
}

inline AppliedMove apply_stab(const Machine& m, const MoveSite& s) {
    Machine out = m;
    MoveSite inv;
    if (s.kind == MoveKind::StabPlus) {
        if (s.anchor < 0 || s.anchor >= out.reg_count())
            throw std::domain_error("Stab+: bad register");
        if (out.is_agent(s.anchor)) throw std::domain_error("Stab+: register is already an agent");
        require_admissible(out.quandle, s.op);
        Agent ag;
        ag.op = s.op;
        out.agents[s.anchor] = ag;
        inv.kind = MoveKind::StabMinus;
        inv.anchor = s.anchor;
    } else {
        auto it = out.agents.find(s.anchor);
        if (it == out.agents.end() || !it->second.patients.empty())
            throw std::domain_error("Stab-: register is not an empty agent");
        inv.kind = MoveKind::StabPlus;
        inv.anchor = s.anchor;
        inv.op = it->second.op;
        out.agents.erase(it);
    }
    inv.fingerprint = machine_fingerprint(out);
    return {std::move(out), inv};
}

} // namespace detail

inline AppliedMove apply_move_ex(const Machine& m, const MoveSite& s) {
    detail::require_colored(m);
    if (s.fingerprint != 0 && s.fingerprint != machine_fingerprint(m))
        throw std::domain_error("stale move site: machine changed since enumeration");
    switch (s.kind) {
        case MoveKind::R1Plus: return detail::apply_r1_plus(m, s);
        case MoveKind::R1Minus: return detail::apply_r1_minus(m, s);
        case MoveKind::R2Plus: return detail::apply_r2_plus(m, s);
        case MoveKind::R2Minus: return detail::apply_r2_minus(m, s);
        case MoveKind::R3: return detail::apply_r3(m, s);
        case MoveKind::StabPlus:
        case MoveKind::StabMinus: return detail::apply_stab(m, s);
    }
    throw std::logic_error("unreachable");
}

inline Machine apply_move(const Machine& m, const MoveSite& s) {
    return apply_move_ex(m, s).machine;
}

} // namespace tanglekit
