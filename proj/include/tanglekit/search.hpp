#pragma once

// Budgeted equivalence search. The invariant profile refutes; a bidirectional
// breadth-first search over canonical states certifies, returning a move
// sequence replayable from the first machine. Budget exhaustion is reported
// as inconclusive, never as non-equivalence.

#include <unordered_map>

#include "canonical.hpp"

namespace tanglekit {

struct SearchBudget {
    int max_moves = 8;
    int max_states = 20000;
    int max_net_stabs = 2;
};

struct SearchResult {
    enum class Status { Found, NotFoundWithinBudget, DistinguishedByInvariant } status =
        Status::NotFoundWithinBudget;
    std::vector<MoveSite> sequence; // replayable from machine `a`
    int states_explored = 0;
    std::string certificate; // profile mismatch rendering, when distinguished
};

inline Machine replay_sequence(const Machine& a, const std::vector<MoveSite>& seq) {
    Machine m = a;
    for (const auto& s : seq) m = apply_move(m, s);
    return m;
}

namespace detail {

inline MoveKind inverse_kind(MoveKind k) {
    switch (k) {
        case MoveKind::R1Plus: return MoveKind::R1Minus;
        case MoveKind::R1Minus: return MoveKind::R1Plus;
        case MoveKind::R2Plus: return MoveKind::R2Minus;
        case MoveKind::R2Minus: return MoveKind::R2Plus;
        case MoveKind::R3: return MoveKind::R3;
        case MoveKind::StabPlus: return MoveKind::StabMinus;
        case MoveKind::StabMinus: return MoveKind::StabPlus;
    }
    return k;
}

struct SearchNode {
    Machine machine;
    std::string parent;   // key of the parent node; empty at the root
    MoveSite fwd_site;    // applied to the parent's machine to reach here
    MoveKind arrived_by = MoveKind::R3;
    int depth = 0;
    int stabs = 0;
    bool root = true;
};

} // namespace detail

inline SearchResult search_equivalent(const Machine& a, const Machine& b,
                                      const SearchBudget& budget = {}) {
    if (!(a.quandle == b.quandle))
        throw std::domain_error("search_equivalent: machines over different quandles");
    SearchResult res;

    InvariantProfile pa = invariant_profile(a), pb = invariant_profile(b);
    if (!(pa == pb)) {
        res.status = SearchResult::Status::DistinguishedByInvariant;
        res.certificate = "profiles differ: " + pa.str() + " vs " + pb.str();
        return res;
    }

    using Visited = std::unordered_map<std::string, detail::SearchNode>;
    Visited va, vb;
    std::string ka = canonical_key(a), kb = canonical_key(b);
    va[ka] = {a, "", {}, MoveKind::R3, 0, 0, true};
    vb[kb] = {b, "", {}, MoveKind::R3, 0, 0, true};
    res.states_explored = 2;

    std::string meet;
    if (ka == kb) meet = ka;

    std::vector<std::string> fa{ka}, fb{kb};
    int da = 0, db = 0;

    while (meet.empty() && da + db < budget.max_moves && !fa.empty() && !fb.empty()) {
        bool expand_a = fa.size() <= fb.size();
        auto& frontier = expand_a ? fa : fb;
        auto& mine = expand_a ? va : vb;
        auto& theirs = expand_a ? vb : va;
        int& depth = expand_a ? da : db;

        std::vector<std::string> next;
        for (const auto& key : frontier) {
            const detail::SearchNode node = mine.at(key); // copy: map may rehash
            for (const auto& site : enumerate_moves(node.machine)) {
                int stabs = node.stabs;
                if (site.kind == MoveKind::StabPlus) ++stabs;
                if (site.kind == MoveKind::StabMinus) --stabs;
                if (std::abs(stabs) > budget.max_net_stabs) continue;
                AppliedMove applied;
                try {
                    applied = apply_move_ex(node.machine, site);
                } catch (const std::exception&) {
                    continue;
                }
                std::string ck = canonical_key(applied.machine);
                if (mine.count(ck)) continue;
                mine[ck] = {std::move(applied.machine), key, site, site.kind,
                            node.depth + 1, stabs, false};
                ++res.states_explored;
                next.push_back(ck);
                if (theirs.count(ck)) { meet = ck; break; }
                if (res.states_explored >= budget.max_states) break;
            }
            if (!meet.empty() || res.states_explored >= budget.max_states) break;
        }
        frontier = std::move(next);
        ++depth;
        if (res.states_explored >= budget.max_states && meet.empty()) break;
    }

    if (meet.empty()) {
        res.status = SearchResult::Status::NotFoundWithinBudget;
        return res;
    }

    // Forward half: root(a) .. meet.
    std::vector<MoveSite> seq;
    {
        std::vector<MoveSite> rev;
        std::string k = meet;
        while (!va.at(k).root) {
            rev.push_back(va.at(k).fwd_site);
            k = va.at(k).parent;
        }
        seq.assign(rev.rbegin(), rev.rend());
    }

    // Backward half: meet .. root(b), realised by matching inverse moves on
    // the live replay so that every site anchors on the machine it is
    // applied to.
    Machine current = replay_sequence(a, seq);
    {
        std::string k = meet;
        while (!vb.at(k).root) {
            const auto& node = vb.at(k);
            std::string target = node.parent;
            MoveKind want = detail::inverse_kind(node.arrived_by);
            bool matched = false;
            for (const auto& site : enumerate_moves(current)) {
                if (site.kind != want) continue;
                Machine nextm;
                try {
                    nextm = apply_move(current, site);
                } catch (const std::exception&) {
                    continue;
                }
                if (canonical_key(nextm) == target) {
                    seq.push_back(site);
                    current = std::move(nextm);
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                // Should not happen: every move kind has an inverse site.
                res.status = SearchResult::Status::NotFoundWithinBudget;
                return res;
            }
            k = target;
        }
    }

    res.status = SearchResult::Status::Found;
    res.sequence = std::move(seq);
    return res;
}

} // namespace tanglekit
