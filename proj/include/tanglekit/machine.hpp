#pragma once

// The machine model: a finite graph that is a disjoint union of paths and
// cycles, a set of agent registers, per-agent patient edges with local
// direction flags, an operation label per agent, and a (possibly partial)
// colouring. The colouring condition on an edge (v,w):
//
//   - e not acted on:  rho(v) = rho(w)
//   - e acted on by u: rho(v) <|_u rho(u) = rho(w), or the reverse,
//                      according to the edge's direction flag.
//
// Machines are immutable values; every operation returns a new machine.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quandle.hpp"

namespace tanglekit {

using RegId = int;

struct EdgeRef {
    int comp = -1;
    int idx = -1;

    friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
    friend auto operator<=>(const EdgeRef&, const EdgeRef&) = default;
};

struct PatientRef {
    EdgeRef edge;
    // true: apply(op, colour(first), colour(agent)) = colour(second), where
    // first/second follow the component's stored traversal order.
    bool from_first = true;

    friend bool operator==(const PatientRef&, const PatientRef&) = default;
};

struct Agent {
    OpLabel op;
    std::vector<PatientRef> patients;
};

struct Component {
    bool cycle = false;
    std::vector<RegId> regs;

    int edge_count() const {
        if (cycle) return static_cast<int>(regs.size());
        return std::max<int>(0, static_cast<int>(regs.size()) - 1);
    }
};

struct Machine {
    Quandle quandle;
    std::vector<std::string> names;
    std::vector<std::optional<ColorValue>> colors;
    std::vector<Component> components;
    std::map<RegId, Agent> agents;
    int fresh_counter = 0; // deterministic source of generated register names

    int reg_count() const { return static_cast<int>(names.size()); }

    RegId add_register(const std::string& name, std::optional<ColorValue> color = {}) {
        names.push_back(name);
        colors.push_back(std::move(color));
        return static_cast<RegId>(names.size()) - 1;
    }

    std::string fresh_name() {
        for (;;) {
            std::string n = "r" + std::to_string(fresh_counter++);
            if (std::find(names.begin(), names.end(), n) == names.end()) return n;
        }
    }

    std::pair<RegId, RegId> edge_ends(const EdgeRef& e) const {
        const Component& c = components.at(e.comp);
        RegId a = c.regs.at(e.idx);
        RegId b = c.regs.at((e.idx + 1) % c.regs.size());
        return {a, b};
    }

    std::optional<RegId> find_register(const std::string& name) const {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) return std::nullopt;
        return static_cast<RegId>(it - names.begin());
    }

    // (component, position) of each register; -1 when absent from all.
    std::vector<std::pair<int, int>> locate() const {
        std::vector<std::pair<int, int>> loc(names.size(), {-1, -1});
        for (int c = 0; c < static_cast<int>(components.size()); ++c)
            for (int p = 0; p < static_cast<int>(components[c].regs.size()); ++p)
                loc[components[c].regs[p]] = {c, p};
        return loc;
    }

    // Acting agent of each edge, or -1. Indexed [comp][edge idx].
    std::vector<std::vector<std::pair<RegId, const PatientRef*>>> edge_agents() const {
        std::vector<std::vector<std::pair<RegId, const PatientRef*>>> ea(components.size());
        for (size_t c = 0; c < components.size(); ++c)
            ea[c].assign(components[c].edge_count(), {-1, nullptr});
        for (const auto& [u, ag] : agents)
            for (const auto& p : ag.patients) {
                auto& slot = ea.at(p.edge.comp).at(p.edge.idx);
                slot = {u, &p};
            }
        return ea;
    }

    bool is_agent(RegId r) const { return agents.count(r) != 0; }

    // Exponent of the base operation reading the stored edge orientation
    // first -> second: +1 forward, -1 inverse.
    static int exponent_first_to_second(const OpLabel& op, const PatientRef& p) {
        int e = p.from_first ? 1 : -1;
        if (op.inverse) e = -e;
        return e;
    }
};

// ---------------------------------------------------------------------------
// Structural and colouring validation
// ---------------------------------------------------------------------------

struct EdgeViolation {
    EdgeRef edge;
    RegId v = -1, w = -1;
    std::string message;
};

struct ValidationReport {
    std::vector<std::string> structural;
    std::vector<EdgeViolation> violations;
    std::vector<RegId> uncolored;

    bool structurally_ok() const { return structural.empty(); }
    bool valid() const { return structural.empty() && violations.empty() && uncolored.empty(); }
};

inline std::vector<std::string> check_structure(const Machine& m) {
    std::vector<std::string> errs;
    std::vector<int> seen(m.names.size(), 0);
    for (const auto& c : m.components) {
        if (c.regs.empty()) errs.push_back("empty component");
        for (RegId r : c.regs) {
            if (r < 0 || r >= m.reg_count()) {
                errs.push_back("component references unknown register");
                continue;
            }
            ++seen[r];
        }
        if (c.cycle && c.regs.size() >= 2) {
            std::set<RegId> uniq(c.regs.begin(), c.regs.end());
            if (uniq.size() != c.regs.size()) errs.push_back("repeated register inside a cycle");
        }
    }
    for (int r = 0; r < m.reg_count(); ++r)
        if (seen[r] != 1)
            errs.push_back("register '" + m.names[r] + "' appears in " +
                           std::to_string(seen[r]) + " component slots (want 1)");

    std::set<std::pair<int, int>> acted;
    for (const auto& [u, ag] : m.agents) {
        if (u < 0 || u >= m.reg_count()) {
            errs.push_back("agent id out of range");
            continue;
        }
        try {
            require_admissible(m.quandle, ag.op);
        } catch (const std::exception& e) {
            errs.push_back("agent '" + m.names[u] + "': " + e.what());
        }
        for (const auto& p : ag.patients) {
            if (p.edge.comp < 0 || p.edge.comp >= static_cast<int>(m.components.size()) ||
                p.edge.idx < 0 || p.edge.idx >= m.components[p.edge.comp].edge_count()) {
                errs.push_back("agent '" + m.names[u] + "': patient edge out of range");
                continue;
            }
            if (!acted.insert({p.edge.comp, p.edge.idx}).second)
                errs.push_back("edge acted on by more than one agent/patient entry");
        }
    }
    return errs;
}

inline ValidationReport validate(const Machine& m) {
    ValidationReport rep;
    rep.structural = check_structure(m);
    if (!rep.structural.empty()) return rep;

    for (int r = 0; r < m.reg_count(); ++r)
        if (!m.colors[r]) rep.uncolored.push_back(r);

    double eps = m.quandle.exact_carrier() ? 0.0 : EPS_EQ;
    auto ea = m.edge_agents();
    for (int c = 0; c < static_cast<int>(m.components.size()); ++c) {
        for (int k = 0; k < m.components[c].edge_count(); ++k) {
            EdgeRef e{c, k};
            auto [a, b] = m.edge_ends(e);
            auto [u, patient] = ea[c][k];
            if (u < 0) {
                if (m.colors[a] && m.colors[b] && !color_equal(*m.colors[a], *m.colors[b], eps))
                    rep.violations.push_back({e, a, b,
                        "unacted edge with unequal colours " + color_str(*m.colors[a]) +
                        " vs " + color_str(*m.colors[b])});
                continue;
            }
            if (!m.colors[a] || !m.colors[b] || !m.colors[u]) continue; // reported as uncolored
            RegId in = patient->from_first ? a : b;
            RegId out = patient->from_first ? b : a;
            try {
                ColorValue expect = op_apply(m.quandle, m.agents.at(u).op, *m.colors[in], *m.colors[u]);
                if (!color_equal(expect, *m.colors[out], eps))
                    rep.violations.push_back({e, a, b,
                        "edge relation fails: " + color_str(*m.colors[in]) + " " +
                        m.agents.at(u).op.key() + " " + color_str(*m.colors[u]) + " = " +
                        color_str(expect) + ", register holds " + color_str(*m.colors[out])});
            } catch (const std::exception& ex) {
                rep.violations.push_back({e, a, b, std::string("operation error: ") + ex.what()});
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Colouring solver: worklist propagation, then an exact affine phase for
// linear carriers (closure constraints are affine, so cyclic dependencies
// that propagation cannot break still pin down unique colourings).
// ---------------------------------------------------------------------------

struct ColoringResult {
    enum class Status { Solved, Underdetermined, Inconsistent } status = Status::Underdetermined;
    Machine machine;                 // colours filled in as far as determined
    std::vector<RegId> unresolved;   // Underdetermined
    RegId conflict_reg = -1;         // Inconsistent
    std::string conflict_a, conflict_b;
    int solution_nullity = 0;        // affine phase: dimension of solution set
    // Affine solution-set description (exact carriers): one particular
    // colouring of the unresolved registers plus a basis of deltas.
    std::map<RegId, ColorValue> affine_particular;
    std::vector<std::map<RegId, ColorValue>> affine_basis;
};

namespace detail {

inline int carrier_slots(const Quandle& q) {
    switch (q.carrier) {
        case Carrier::RationalScalar:
        case Carrier::FloatScalar: return 1;
        case Carrier::RationalVector:
        case Carrier::FloatVector: return q.dim;
        case Carrier::HermitianRational: return q.dim * q.dim;
        case Carrier::HermitianComplex: return 2 * q.dim * q.dim;
        default: return 0; // affine phase not applicable
    }
}

inline bool carrier_rational(const Quandle& q) {
    return q.carrier == Carrier::RationalScalar || q.carrier == Carrier::RationalVector ||
           q.carrier == Carrier::HermitianRational;
}

inline Rational slot_rat(const ColorValue& c, int s) {
    if (std::holds_alternative<Rational>(c)) return std::get<Rational>(c);
    if (std::holds_alternative<RatVec>(c)) return std::get<RatVec>(c).v.at(s);
    return std::get<RatMatrix>(c).a.at(s);
}

inline double slot_f(const ColorValue& c, int s) {
    if (std::holds_alternative<double>(c)) return std::get<double>(c);
    if (std::holds_alternative<FloatVec>(c)) return std::get<FloatVec>(c).v.at(s);
    const auto& m = std::get<ComplexMatrix>(c);
    size_t k = static_cast<size_t>(s) / 2;
    return (s % 2 == 0) ? m.a.at(k).real() : m.a.at(k).imag();
}

inline ColorValue color_from_rat_slots(const Quandle& q, const std::vector<Rational>& v) {
    switch (q.carrier) {
        case Carrier::RationalScalar: return v.at(0);
        case Carrier::RationalVector: {
            RatVec r; r.v = v; return r;
        }
        case Carrier::HermitianRational: {
            RatMatrix m(q.dim, q.dim);
            m.a = v;
            return m;
        }
        default: throw std::logic_error("bad carrier for rational slots");
    }
}

inline ColorValue color_from_f_slots(const Quandle& q, const std::vector<double>& v) {
    switch (q.carrier) {
        case Carrier::FloatScalar: return v.at(0);
        case Carrier::FloatVector: {
            FloatVec r; r.v = v; return r;
        }
        case Carrier::HermitianComplex: {
            ComplexMatrix m(q.dim);
            for (size_t k = 0; k < m.a.size(); ++k)
                m.a[k] = {v.at(2 * k), v.at(2 * k + 1)};
            return m;
        }
        default: throw std::logic_error("bad carrier for float slots");
    }
}

} // namespace detail

inline ColoringResult solve_coloring(const Machine& m,
                                     const std::map<RegId, ColorValue>& seeds = {},
                                     int shuffle_seed = -1) {
    ColoringResult res;
    res.machine = m;
    auto structural = check_structure(m);
    if (!structural.empty())
        throw std::invalid_argument("solve_coloring: structurally invalid machine: " + structural[0]);

    double eps = m.quandle.exact_carrier() ? 0.0 : EPS_EQ;
    auto& colors = res.machine.colors;

    bool conflict = false;
    auto assign = [&](RegId r, const ColorValue& v) -> bool {
        if (colors[r]) {
            if (!color_equal(*colors[r], v, eps)) {
                conflict = true;
                res.conflict_reg = r;
                res.conflict_a = color_str(*colors[r]);
                res.conflict_b = color_str(v);
            }
            return false;
        }
        colors[r] = v;
        return true;
    };

    for (const auto& [r, v] : seeds) {
        if (r < 0 || r >= m.reg_count())
            throw std::invalid_argument("solve_coloring: seed register out of range");
        assign(r, v);
        if (conflict) { res.status = ColoringResult::Status::Inconsistent; return res; }
    }

    // Phase 1: propagate along edges in both directions. The agent colour is
    // needed before its patient edges can fire.
    struct EdgeItem { EdgeRef e; RegId a, b, u; const PatientRef* p; };
    std::vector<EdgeItem> items;
    auto ea = m.edge_agents();
    for (int c = 0; c < static_cast<int>(m.components.size()); ++c)
        for (int k = 0; k < m.components[c].edge_count(); ++k) {
            EdgeRef e{c, k};
            auto [a, b] = m.edge_ends(e);
            items.push_back({e, a, b, ea[c][k].first, ea[c][k].second});
        }
    if (shuffle_seed >= 0) {
        std::mt19937 rng(static_cast<unsigned>(shuffle_seed));
        std::shuffle(items.begin(), items.end(), rng);
    }

    bool changed = true;
    while (changed && !conflict) {
        changed = false;
        for (const auto& it : items) {
            if (it.u < 0) {
                if (colors[it.a] && !colors[it.b]) changed |= assign(it.b, *colors[it.a]);
                else if (colors[it.b] && !colors[it.a]) changed |= assign(it.a, *colors[it.b]);
                else if (colors[it.a] && colors[it.b] &&
                         !color_equal(*colors[it.a], *colors[it.b], eps)) {
                    conflict = true;
                    res.conflict_reg = it.b;
                    res.conflict_a = color_str(*colors[it.a]);
                    res.conflict_b = color_str(*colors[it.b]);
                }
                continue;
            }
            if (!colors[it.u]) continue;
            const OpLabel& op = m.agents.at(it.u).op;
            RegId in = it.p->from_first ? it.a : it.b;
            RegId out = it.p->from_first ? it.b : it.a;
            try {
                if (colors[in]) {
                    ColorValue v = op_apply(m.quandle, op, *colors[in], *colors[it.u]);
                    if (!colors[out]) changed |= assign(out, v);
                    else if (!color_equal(*colors[out], v, eps)) {
                        conflict = true;
                        res.conflict_reg = out;
                        res.conflict_a = color_str(*colors[out]);
                        res.conflict_b = color_str(v);
                    }
                } else if (colors[out]) {
                    changed |= assign(in, op_invert(m.quandle, op, *colors[out], *colors[it.u]));
                }
            } catch (const std::exception&) {
                // Leave for validate() to report; propagation just stalls here.
            }
            if (conflict) break;
        }
    }
    if (conflict) { res.status = ColoringResult::Status::Inconsistent; return res; }

    std::vector<RegId> unknown;
    for (int r = 0; r < m.reg_count(); ++r)
        if (!colors[r]) unknown.push_back(r);
    if (unknown.empty()) {
        res.status = ColoringResult::Status::Solved;
        return res;
    }

    // Phase 2: exact affine closure. Applicable when the carrier is a linear
    // space and every constraint touching an unknown is from the linear family.
    int slots = detail::carrier_slots(m.quandle);
    bool applicable = slots > 0;
    if (applicable) {
        for (const auto& it : items) {
            bool touches = !colors[it.a] || !colors[it.b] || (it.u >= 0 && !colors[it.u]);
            if (!touches) continue;
            if (it.u >= 0 && m.agents.at(it.u).op.family != OpFamily::Linear) {
                applicable = false;
                break;
            }
        }
    }
    if (!applicable) {
        res.status = ColoringResult::Status::Underdetermined;
        res.unresolved = unknown;
        return res;
    }

    std::map<RegId, int> base;
    for (size_t i = 0; i < unknown.size(); ++i)
        base[unknown[i]] = static_cast<int>(i) * slots;
    const int nunk = static_cast<int>(unknown.size()) * slots;

    if (detail::carrier_rational(m.quandle)) {
        std::vector<std::vector<Rational>> rows;
        std::vector<Rational> rhs;
        auto add_row = [&](std::initializer_list<std::pair<RegId, Rational>> terms,
                           int slot, Rational c) {
            std::vector<Rational> row(nunk, Rational(0));
            for (auto& [r, coef] : terms) {
                if (colors[r]) c -= coef * detail::slot_rat(*colors[r], slot);
                else row[base[r] + slot] += coef;
            }
            rows.push_back(std::move(row));
            rhs.push_back(c);
        };
        for (const auto& it : items) {
            bool touches = !colors[it.a] || !colors[it.b] || (it.u >= 0 && !colors[it.u]);
            if (!touches) continue;
            for (int s = 0; s < slots; ++s) {
                if (it.u < 0) {
                    add_row({{it.a, Rational(1)}, {it.b, Rational(-1)}}, s, Rational(0));
                } else {
                    const OpLabel& op = m.agents.at(it.u).op;
                    Rational sp = op.param.r;
                    RegId in = it.p->from_first ? it.a : it.b;
                    RegId out = it.p->from_first ? it.b : it.a;
                    if (op.inverse) std::swap(in, out); // z <|^-1 y = x  <=>  x <| y = z
                    // out = (1-s) in + s u
                    add_row({{out, Rational(1)}, {in, sp - Rational(1)}, {it.u, -sp}}, s, Rational(0));
                }
            }
        }
        RatMatrix A(static_cast<int>(rows.size()), nunk);
        for (size_t i = 0; i < rows.size(); ++i)
            for (int j = 0; j < nunk; ++j) A.at(static_cast<int>(i), j) = rows[i][j];
        auto sol = solve_exact(A, rhs);
        if (sol.kind == RatLinearSolution::Kind::Inconsistent) {
            res.status = ColoringResult::Status::Inconsistent;
            res.conflict_reg = unknown.front();
            res.conflict_a = "affine closure constraints";
            res.conflict_b = "inconsistent";
            return res;
        }
        if (sol.kind == RatLinearSolution::Kind::Unique) {
            for (size_t i = 0; i < unknown.size(); ++i) {
                std::vector<Rational> v(sol.particular.begin() + i * slots,
                                        sol.particular.begin() + (i + 1) * slots);
                colors[unknown[i]] = detail::color_from_rat_slots(m.quandle, v);
            }
            res.status = ColoringResult::Status::Solved;
            return res;
        }
        res.status = ColoringResult::Status::Underdetermined;
        res.solution_nullity = static_cast<int>(sol.free_columns.size());
        std::set<RegId> loose;
        for (const auto& nv : sol.nullspace)
            for (size_t i = 0; i < unknown.size(); ++i)
                for (int s = 0; s < slots; ++s)
                    if (!nv[i * slots + s].is_zero()) loose.insert(unknown[i]);
        res.unresolved.assign(loose.begin(), loose.end());
        for (size_t i = 0; i < unknown.size(); ++i) {
            std::vector<Rational> v(sol.particular.begin() + i * slots,
                                    sol.particular.begin() + (i + 1) * slots);
            res.affine_particular[unknown[i]] = detail::color_from_rat_slots(m.quandle, v);
        }
        for (const auto& nv : sol.nullspace) {
            std::map<RegId, ColorValue> dir;
            for (size_t i = 0; i < unknown.size(); ++i) {
                std::vector<Rational> v(nv.begin() + i * slots, nv.begin() + (i + 1) * slots);
                dir[unknown[i]] = detail::color_from_rat_slots(m.quandle, v);
            }
            res.affine_basis.push_back(std::move(dir));
        }
        return res;
    }

    // Float carriers.
    std::vector<std::vector<double>> A;
    std::vector<double> rhs;
    auto add_row_f = [&](std::initializer_list<std::pair<RegId, double>> terms,
                         int slot, double c) {
        std::vector<double> row(nunk, 0.0);
        for (auto& [r, coef] : terms) {
            if (colors[r]) c -= coef * detail::slot_f(*colors[r], slot);
            else row[base[r] + slot] += coef;
        }
        A.push_back(std::move(row));
        rhs.push_back(c);
    };
    for (const auto& it : items) {
        bool touches = !colors[it.a] || !colors[it.b] || (it.u >= 0 && !colors[it.u]);
        if (!touches) continue;
        for (int s = 0; s < slots; ++s) {
            if (it.u < 0) {
                add_row_f({{it.a, 1.0}, {it.b, -1.0}}, s, 0.0);
            } else {
                const OpLabel& op = m.agents.at(it.u).op;
                double sp = op.param.to_double();
                RegId in = it.p->from_first ? it.a : it.b;
                RegId out = it.p->from_first ? it.b : it.a;
                if (op.inverse) std::swap(in, out);
                add_row_f({{out, 1.0}, {in, sp - 1.0}, {it.u, -sp}}, s, 0.0);
            }
        }
    }
    auto sol = solve_float(std::move(A), std::move(rhs));
    if (sol.kind == FloatLinearSolution::Kind::Inconsistent) {
        res.status = ColoringResult::Status::Inconsistent;
        res.conflict_reg = unknown.front();
        res.conflict_a = "affine closure constraints";
        res.conflict_b = "inconsistent";
        return res;
    }
    if (sol.kind == FloatLinearSolution::Kind::Unique) {
        for (size_t i = 0; i < unknown.size(); ++i) {
            std::vector<double> v(sol.particular.begin() + i * slots,
                                  sol.particular.begin() + (i + 1) * slots);
            colors[unknown[i]] = detail::color_from_f_slots(m.quandle, v);
        }
        res.status = ColoringResult::Status::Solved;
        return res;
    }
    res.status = ColoringResult::Status::Underdetermined;
    res.solution_nullity = static_cast<int>(sol.free_columns.size());
    res.unresolved = unknown;
    return res;
}

// ---------------------------------------------------------------------------
// Processes and endpoints
// ---------------------------------------------------------------------------

struct Process {
    int component = -1;
    bool control = false; // cycles are the control processes U(M)
    std::vector<RegId> regs;

    RegId initial() const { return regs.front(); }
    RegId terminal() const { return regs.back(); }
};

inline std::vector<Process> processes(const Machine& m) {
    std::vector<Process> out;
    for (int c = 0; c < static_cast<int>(m.components.size()); ++c)
        out.push_back({c, m.components[c].cycle, m.components[c].regs});
    return out;
}

inline std::pair<std::vector<RegId>, std::vector<RegId>> endpoints(const Machine& m) {
    std::vector<RegId> initials, terminals;
    for (const auto& c : m.components) {
        if (c.cycle) continue;
        initials.push_back(c.regs.front());
        terminals.push_back(c.regs.back());
    }
    return {initials, terminals};
}

// ---------------------------------------------------------------------------
// Concatenation and closure (vertex identification)
// ---------------------------------------------------------------------------

struct Pairing {
    std::vector<std::pair<RegId, RegId>> pairs; // (terminal, initial)
};

namespace detail {

// Remap every register reference through `regmap` and every patient edge
// through `edgemap` (identity when an edge keeps its coordinates).
inline void remap_machine(Machine& m, const std::vector<RegId>& regmap,
                          const std::map<std::pair<int, int>, std::pair<int, int>>& edgemap) {
    for (auto& c : m.components)
        for (auto& r : c.regs) r = regmap[r];
    std::map<RegId, Agent> agents;
    for (auto& [u, ag] : m.agents) {
        Agent moved = ag;
        for (auto& p : moved.patients) {
            auto it = edgemap.find({p.edge.comp, p.edge.idx});
            if (it != edgemap.end()) p.edge = {it->second.first, it->second.second};
        }
        RegId nu = regmap[u];
        auto [pos, fresh] = agents.try_emplace(nu, std::move(moved));
        if (!fresh) {
            if (!(pos->second.op == moved.op))
                throw std::domain_error("cannot merge agents with different operations");
            for (auto& p : moved.patients) pos->second.patients.push_back(p);
        }
    }
    m.agents = std::move(agents);
}

// Remove registers whose ids are no longer referenced by any component.
inline void compact_registers(Machine& m) {
    std::vector<bool> used(m.names.size(), false);
    for (const auto& c : m.components)
        for (RegId r : c.regs) used[r] = true;
    std::vector<RegId> regmap(m.names.size(), -1);
    std::vector<std::string> names;
    std::vector<std::optional<ColorValue>> colors;
    for (int r = 0; r < m.reg_count(); ++r) {
        if (!used[r]) continue;
        regmap[r] = static_cast<RegId>(names.size());
        names.push_back(m.names[r]);
        colors.push_back(m.colors[r]);
    }
    m.names = std::move(names);
    m.colors = std::move(colors);
    remap_machine(m, regmap, {});
}

// Identify terminal register t with initial register i (colour-unifying).
inline void merge_pair(Machine& m, RegId t, RegId i) {
    if (t == i) throw std::domain_error("pairing identifies a register with itself");
    auto loc = m.locate();
    auto [ct, pt] = loc[t];
    auto [ci, pi] = loc[i];
    if (ct < 0 || ci < 0) throw std::domain_error("pairing references removed register");
    const Component& compt = m.components[ct];
    const Component& compi = m.components[ci];
    if (compt.cycle || pt != static_cast<int>(compt.regs.size()) - 1)
        throw std::domain_error("'" + m.names[t] + "' is not a terminal register");
    if (compi.cycle || pi != 0)
        throw std::domain_error("'" + m.names[i] + "' is not an initial register");

    // Colour unification: equal, or one side inherits.
    double eps = m.quandle.exact_carrier() ? 0.0 : EPS_EQ;
    std::optional<ColorValue> merged = m.colors[t];
    if (m.colors[t] && m.colors[i]) {
        if (!color_equal(*m.colors[t], *m.colors[i], eps))
            throw std::domain_error("colour mismatch at pairing (" + m.names[t] + " = " +
                                    color_str(*m.colors[t]) + ", " + m.names[i] + " = " +
                                    color_str(*m.colors[i]) + ")");
    } else if (m.colors[i]) {
        merged = m.colors[i];
    }

    std::vector<RegId> regmap(m.names.size());
    for (int r = 0; r < m.reg_count(); ++r) regmap[r] = r;
    std::map<std::pair<int, int>, std::pair<int, int>> edgemap;

    if (ct != ci) {
        // Splice component ci onto the end of ct; register i merges into t.
        // All edge-map targets are expressed in post-erase coordinates.
        regmap[i] = t;
        Machine next = m;
        auto& dst = next.components[ct].regs;
        int told = static_cast<int>(dst.size());
        for (size_t k = 1; k < compi.regs.size(); ++k) dst.push_back(compi.regs[k]);
        int ct_post = ct > ci ? ct - 1 : ct;
        for (int k = 0; k < compi.edge_count(); ++k)
            edgemap[{ci, k}] = {ct_post, told - 1 + k};
        next.components.erase(next.components.begin() + ci);
        for (int c = 0; c < static_cast<int>(m.components.size()); ++c) {
            if (c == ci) continue;
            int nc = c > ci ? c - 1 : c;
            if (nc != c)
                for (int k = 0; k < m.components[c].edge_count(); ++k)
                    edgemap[{c, k}] = {nc, k};
        }
        remap_machine(next, regmap, edgemap);
        next.colors[t] = merged;
        m = std::move(next);
    } else {
        // Close the path into a cycle: drop the terminal slot, identify with i.
        regmap[t] = i;
        Machine next = m;
        auto& regs = next.components[ct].regs;
        regs.pop_back();
        next.components[ct].cycle = true;
        // Path edges keep their indices; the former edge (n-2 -> t) becomes the
        // wrap edge of the cycle, which has the same index n-2.
        remap_machine(next, regmap, {});
        next.colors[i] = merged;
        m = std::move(next);
    }
    compact_registers(m);
}

} // namespace detail

// Concatenate machine b after machine a, identifying each (terminal of a,
// initial of b) pair. Pair ids refer to a's and b's own register ids.
inline Machine concatenate(const Machine& a, const Machine& b, const Pairing& pairing,
                           const std::string& b_name_suffix = "") {
    if (!(a.quandle == b.quandle))
        throw std::domain_error("concatenate: machines over different quandles");
    Machine m = a;
    int offset = a.reg_count();
    for (int r = 0; r < b.reg_count(); ++r) {
        std::string n = b.names[r] + b_name_suffix;
        while (m.find_register(n)) n += "'";
        m.add_register(n, b.colors[r]);
    }
    int comp_offset = static_cast<int>(m.components.size());
    for (const auto& c : b.components) {
        Component cc = c;
        for (auto& r : cc.regs) r += offset;
        m.components.push_back(cc);
    }
    for (const auto& [u, ag] : b.agents) {
        Agent moved = ag;
        for (auto& p : moved.patients) p.edge.comp += comp_offset;
        m.agents[u + offset] = std::move(moved);
    }

    // Track merged ids as pairs are applied one at a time.
    std::vector<std::string> tnames, inames;
    for (auto [t, i] : pairing.pairs) {
        if (t < 0 || t >= a.reg_count()) throw std::domain_error("pairing: bad terminal id");
        if (i < 0 || i >= b.reg_count()) throw std::domain_error("pairing: bad initial id");
        tnames.push_back(a.names[t]);
        inames.push_back(m.names[i + offset]);
    }
    for (size_t k = 0; k < tnames.size(); ++k) {
        auto t = m.find_register(tnames[k]);
        auto i = m.find_register(inames[k]);
        if (!t || !i) throw std::domain_error("pairing register vanished during merge");
        detail::merge_pair(m, *t, *i);
    }
    return m;
}

// Close a machine on itself: identify each (terminal, initial) pair within m.
inline Machine closure(const Machine& mm, const Pairing& pairing) {
    Machine m = mm;
    std::vector<std::string> tnames, inames;
    for (auto [t, i] : pairing.pairs) {
        if (t < 0 || t >= mm.reg_count() || i < 0 || i >= mm.reg_count())
            throw std::domain_error("closure pairing: bad register id");
        tnames.push_back(mm.names[t]);
        inames.push_back(mm.names[i]);
    }
    for (size_t k = 0; k < tnames.size(); ++k) {
        auto t = m.find_register(tnames[k]);
        auto i = m.find_register(inames[k]);
        if (!t || !i) throw std::domain_error("pairing register vanished during merge");
        detail::merge_pair(m, *t, *i);
    }
    return m;
}

// Lower an exact machine onto the float carrier (TANGLEKIT_PRECISION=float):
// rational scalar colours become doubles, rational Hermitian matrices become
// complex, and op parameters follow.
inline Machine to_float_carrier(const Machine& m) {
    Machine out = m;
    switch (m.quandle.carrier) {
        case Carrier::RationalScalar: out.quandle.carrier = Carrier::FloatScalar; break;
        case Carrier::RationalVector: out.quandle.carrier = Carrier::FloatVector; break;
        case Carrier::HermitianRational: out.quandle.carrier = Carrier::HermitianComplex; break;
        default: return out; // already float or not loweable
    }
    for (auto& s : out.quandle.op_pool)
        if (s.exact) s = Scalar(s.r.to_double());
    for (auto& c : out.colors) {
        if (!c) continue;
        if (std::holds_alternative<Rational>(*c)) {
            c = std::get<Rational>(*c).to_double();
        } else if (std::holds_alternative<RatVec>(*c)) {
            FloatVec v;
            for (const auto& e : std::get<RatVec>(*c).v) v.v.push_back(e.to_double());
            c = v;
        } else if (std::holds_alternative<RatMatrix>(*c)) {
            const auto& rm = std::get<RatMatrix>(*c);
            ComplexMatrix cm(rm.rows);
            for (int i = 0; i < rm.rows; ++i)
                for (int k = 0; k < rm.cols; ++k) cm.at(i, k) = rm.at(i, k).to_double();
            c = cm;
        }
    }
    for (auto& [u, ag] : out.agents)
        if (ag.op.param.exact) ag.op.param = Scalar(ag.op.param.r.to_double());
    return out;
}

// Globally recolour a machine through an affine automorphism of a linear
// quandle. Validity is preserved because x -> a x + b commutes with every
// <|_s.
inline Machine apply_affine_automorphism(const Machine& m, const Scalar& a, const Scalar& b) {
    bool zero = a.exact ? a.r.is_zero() : a.f == 0.0;
    if (zero) throw std::domain_error("affine automorphism needs a != 0");
    Machine out = m;
    for (auto& c : out.colors)
        if (c) c = affine_transform(*c, a, b);
    return out;
}

} // namespace tanglekit
