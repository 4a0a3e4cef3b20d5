#pragma once

// Canonical forms and keys. The key is invariant under register relabeling,
// component reordering, cycle rotation/reflection, and patient-order
// permutation; path components keep their stored initial->terminal direction
// (it carries meaning: capacities read initial minus terminal). Unacted
// non-loop edges whose endpoints are not both agents are contracted first,
// so concatenation seams do not distinguish otherwise-identical machines.
//
// Minimisation enumerates component orderings within equal-signature groups
// and locally minimal cycle orientations; exponential in the worst case,
// which is acceptable at desk scale.

#include "moves.hpp"

namespace tanglekit {

namespace detail {

inline void contract_unacted_edge(Machine& m, EdgeRef e) {
    auto [a, b] = m.edge_ends(e);
    RegId surv = m.is_agent(b) ? b : a;
    RegId gone = (surv == a) ? b : a;
    bool removed_is_second = (gone == b);
    int c = e.comp;
    int k = e.idx;
    if (m.components[c].cycle) {
        rotate_cycle(m, c, k);
        k = 0;
    }
    std::map<std::pair<int, int>, std::pair<int, int>> edgemap;
    for (int j = 0; j < m.components[c].edge_count(); ++j) {
        if (j == k) continue;
        edgemap[{c, j}] = {c, j > k ? j - 1 : j};
    }
    merge_register_into(m, gone, surv);
    m.components[c].regs.erase(m.components[c].regs.begin() + (removed_is_second ? k + 1 : k));
    apply_edgemap(m, edgemap);
    compact_registers(m);
}

} // namespace detail

inline Machine contract_seams(Machine m) {
    for (;;) {
        bool did = false;
        auto ea = m.edge_agents();
        for (int c = 0; c < static_cast<int>(m.components.size()) && !did; ++c)
            for (int k = 0; k < m.components[c].edge_count() && !did; ++k) {
                if (ea[c][k].first >= 0) continue;
                auto [a, b] = m.edge_ends({c, k});
                if (a == b) continue;
                if (m.is_agent(a) && m.is_agent(b)) continue;
                detail::contract_unacted_edge(m, {c, k});
                did = true;
            }
        if (!did) return m;
    }
}

namespace detail {

// One concrete presentation choice per component.
struct Orient {
    int rot = 0;
    bool refl = false;
};

inline std::vector<RegId> oriented_regs(const Component& c, const Orient& o) {
    const int n = static_cast<int>(c.regs.size());
    std::vector<RegId> out(n);
    for (int j = 0; j < n; ++j)
        out[j] = c.regs[o.refl ? ((o.rot - j) % n + n) % n : (j + o.rot) % n];
    return out;
}

// Edge transform under an orientation: old edge index -> (new index, flip?).
inline std::pair<int, bool> oriented_edge(const Component& c, const Orient& o, int k) {
    if (!c.cycle) return {k, false};
    const int n = static_cast<int>(c.regs.size());
    if (!o.refl) return {((k - o.rot) % n + n) % n, false};
    return {((o.rot - k - 1) % n + n) % n, true};
}

inline Machine materialize(const Machine& m, const std::vector<int>& order,
                           const std::vector<Orient>& orient) {
    Machine out;
    out.quandle = m.quandle;
    std::vector<RegId> regmap(m.names.size(), -1);
    std::vector<int> comp_pos(m.components.size(), -1);
    for (size_t p = 0; p < order.size(); ++p) comp_pos[order[p]] = static_cast<int>(p);
    for (int ci : order) {
        const Component& c = m.components[ci];
        std::vector<RegId> seq = c.cycle ? oriented_regs(c, orient[ci]) : c.regs;
        Component nc;
        nc.cycle = c.cycle;
        for (RegId r : seq) {
            RegId nr = out.add_register("v" + std::to_string(out.reg_count()), m.colors[r]);
            regmap[r] = nr;
            nc.regs.push_back(nr);
        }
        out.components.push_back(std::move(nc));
    }
    for (const auto& [u, ag] : m.agents) {
        Agent na;
        na.op = ag.op;
        for (const auto& p : ag.patients) {
            const Component& c = m.components[p.edge.comp];
            auto [nk, flip] = oriented_edge(c, orient[p.edge.comp], p.edge.idx);
            PatientRef np;
            np.edge = {comp_pos[p.edge.comp], nk};
            np.from_first = flip ? !p.from_first : p.from_first;
            na.patients.push_back(np);
        }
        std::sort(na.patients.begin(), na.patients.end(),
                  [](const PatientRef& x, const PatientRef& y) {
                      return std::tie(x.edge.comp, x.edge.idx, x.from_first) <
                             std::tie(y.edge.comp, y.edge.idx, y.from_first);
                  });
        out.agents[regmap[u]] = std::move(na);
    }
    return out;
}

inline std::string encode_presentation(const Machine& m) {
    std::ostringstream os;
    os << m.quandle.key() << "#";
    for (const auto& c : m.components) {
        os << (c.cycle ? "C" : "P") << c.regs.size() << "[";
        for (RegId r : c.regs) {
            if (!m.colors[r])
                throw std::domain_error("canonical key requires a fully coloured machine");
            os << color_key(*m.colors[r]) << ";";
        }
        os << "]";
    }
    for (const auto& [u, ag] : m.agents) {
        os << "A" << u << ":" << ag.op.key() << ":";
        for (const auto& p : ag.patients)
            os << "(" << p.edge.comp << "," << p.edge.idx << "," << (p.from_first ? 1 : 0) << ")";
    }
    return os.str();
}

inline std::string local_signature(const Machine& m, int ci, const Orient& o) {
    const Component& c = m.components[ci];
    std::ostringstream os;
    for (RegId r : oriented_regs(c, o)) os << color_key(*m.colors[r]) << ";";
    return os.str();
}

} // namespace detail

// The canonical presentation: seams contracted, components ordered and
// oriented to minimise the byte encoding, registers renumbered in traversal
// order.
inline Machine canonical_form(const Machine& raw) {
    for (int r = 0; r < raw.reg_count(); ++r)
        if (!raw.colors[r])
            throw std::domain_error("canonical key requires a fully coloured machine");
    Machine m = contract_seams(raw);
    const int nc = static_cast<int>(m.components.size());

    // Locally minimal orientation candidates per component.
    std::vector<std::vector<detail::Orient>> cand(nc);
    std::vector<std::string> sig(nc);
    for (int ci = 0; ci < nc; ++ci) {
        const Component& c = m.components[ci];
        if (!c.cycle) {
            cand[ci] = {detail::Orient{}};
            sig[ci] = (c.cycle ? "C" : "P") + std::to_string(c.regs.size()) + ":" +
                      detail::local_signature(m, ci, detail::Orient{});
            continue;
        }
        const int n = static_cast<int>(c.regs.size());
        std::string best;
        for (int rot = 0; rot < n; ++rot)
            for (bool refl : {false, true}) {
                detail::Orient o{rot, refl};
                std::string s = detail::local_signature(m, ci, o);
                if (best.empty() || s < best) {
                    best = s;
                    cand[ci] = {o};
                } else if (s == best) {
                    cand[ci].push_back(o);
                }
            }
        sig[ci] = "C" + std::to_string(n) + ":" + best;
    }

    // Order components by signature; permute within equal-signature groups.
    std::vector<int> base(nc);
    std::iota(base.begin(), base.end(), 0);
    std::sort(base.begin(), base.end(), [&](int x, int y) {
        return sig[x] < sig[y] || (sig[x] == sig[y] && x < y);
    });
    std::vector<std::pair<int, int>> groups; // [begin, end) in base
    for (int i = 0; i < nc;) {
        int j = i;
        while (j < nc && sig[base[j]] == sig[base[i]]) ++j;
        groups.push_back({i, j});
        i = j;
    }

    std::string best_key;
    Machine best_machine;
    std::vector<detail::Orient> orient(nc);
    std::vector<int> order = base;

    std::function<void(size_t)> try_orients = [&](size_t ci_pos) {
        if (ci_pos == order.size()) {
            Machine cand_m = detail::materialize(m, order, orient);
            std::string key = detail::encode_presentation(cand_m);
            if (best_key.empty() || key < best_key) {
                best_key = key;
                best_machine = std::move(cand_m);
            }
            return;
        }
        int ci = order[ci_pos];
        for (const auto& o : cand[ci]) {
            orient[ci] = o;
            try_orients(ci_pos + 1);
        }
    };

    std::function<void(size_t)> try_groups = [&](size_t g) {
        if (g == groups.size()) {
            try_orients(0);
            return;
        }
        auto [lo, hi] = groups[g];
        std::vector<int> slice(order.begin() + lo, order.begin() + hi);
        std::sort(slice.begin(), slice.end());
        do {
            std::copy(slice.begin(), slice.end(), order.begin() + lo);
            try_groups(g + 1);
        } while (std::next_permutation(slice.begin(), slice.end()));
    };
    try_groups(0);
    return best_machine;
}

inline std::string canonical_key(const Machine& m) {
    return detail::encode_presentation(canonical_form(m));
}

inline bool canonically_equal(const Machine& a, const Machine& b) {
    return canonical_key(a) == canonical_key(b);
}

} // namespace tanglekit
