#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "tanglekit/markov.hpp"

using namespace tanglekit;

namespace {

int count_kind(const std::vector<MoveSite>& sites, MoveKind k) {
    int n = 0;
    for (const auto& s : sites) n += (s.kind == k);
    return n;
}

// Structural equality of sites, ignoring the fingerprint stamp.
bool site_matches(const MoveSite& a, const MoveSite& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case MoveKind::R1Plus:
            return a.anchor == b.anchor && a.insert_after == b.insert_after &&
                   a.agent_new == b.agent_new && a.from_first == b.from_first && a.op == b.op;
        case MoveKind::R1Minus: return a.edge == b.edge;
        case MoveKind::R2Plus:
            return a.comp == b.comp && a.pos == b.pos && a.toward_low == b.toward_low &&
                   a.agent == b.agent && a.op == b.op && a.inverse_first == b.inverse_first;
        case MoveKind::R2Minus: return a.middle == b.middle;
        case MoveKind::R3:
            return a.slider == b.slider && a.over == b.over && a.carrier == b.carrier &&
                   a.pairs == b.pairs;
        case MoveKind::StabPlus: return a.anchor == b.anchor && a.op == b.op;
        case MoveKind::StabMinus: return a.anchor == b.anchor;
    }
    return false;
}

} // namespace

TEST_CASE("kink pattern machines expose R1- sites") {
    // the strand acts on itself: [x, x <| x] with agent x
    Machine m;
    m.quandle = make_linear_rational();
    Rational c(3, 4);
    RegId x = m.add_register("x", ColorValue(c));
    RegId out = m.add_register("out", ColorValue(c));
    m.components.push_back({false, {x, out}});
    Agent ag;
    ag.op = linear_op(Rational(1, 2));
    ag.patients.push_back({{0, 0}, true});
    m.agents[x] = ag;
    REQUIRE(validate(m).valid());
    auto sites = enumerate_moves(m);
    CHECK(count_kind(sites, MoveKind::R1Minus) == 1);
}

TEST_CASE("R2+ creates the pattern its inverse removes") {
    Machine m = single_interaction();
    auto sites = enumerate_moves(m);
    int checked = 0;
    for (const auto& s : sites) {
        if (s.kind != MoveKind::R2Plus) continue;
        auto applied = apply_move_ex(m, s);
        REQUIRE(validate(applied.machine).valid());
        // the inverse R2- site is among the enumerated moves of the image
        auto next = enumerate_moves(applied.machine);
        bool found = false;
        for (const auto& t : next) found |= site_matches(t, applied.inverse);
        CHECK(found);
        // new registers coloured x <| y then back to x
        CHECK(same_key(apply_move(applied.machine, applied.inverse), m));
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("R2+ colours the poked pair as x <| y then x") {
    Machine m = single_interaction(Rational(5), Rational(3), Rational(1, 2));
    MoveSite s;
    s.kind = MoveKind::R2Plus;
    s.comp = 0;
    s.pos = 1;
    s.toward_low = true;
    s.agent = *m.find_register("y");
    s.op = linear_op(Rational(1, 2));
    s.inverse_first = false;
    Machine poked = apply_move(m, s);
    REQUIRE(validate(poked).valid());
    // pattern [x, mid, far]: mid = x <| y = 4, far = x = 5
    auto mid = poked.find_register("r0");
    auto far = poked.find_register("r1");
    REQUIRE(mid);
    REQUIRE(far);
    CHECK(std::get<Rational>(*poked.colors[*mid]) == Rational(4));
    CHECK(std::get<Rational>(*poked.colors[*far]) == Rational(5));
}

TEST_CASE("toy-example left machine carries exactly one R3 site") {
    Machine L = toy_left();
    auto sites = enumerate_moves(L);
    CHECK(count_kind(sites, MoveKind::R3) == 1);
    for (const auto& s : sites) {
        if (s.kind != MoveKind::R3) continue;
        Machine image = apply_move(L, s);
        CHECK(validate(image).valid());
        CHECK(same_key(image, toy_right()));
    }
}

TEST_CASE("R1- then R1+ returns the original machine") {
    Machine m;
    m.quandle = make_linear_rational();
    Rational c(1, 3);
    RegId x = m.add_register("x", ColorValue(c));
    RegId k = m.add_register("k", ColorValue(c));
    RegId t = m.add_register("t", ColorValue(c));
    m.components.push_back({false, {x, k, t}});
    Agent ag;
    ag.op = linear_op(Rational(1, 4));
    ag.patients.push_back({{0, 0}, true});
    m.agents[x] = ag;
    REQUIRE(validate(m).valid());

    auto sites = enumerate_moves(m);
    bool did = false;
    for (const auto& s : sites) {
        if (s.kind != MoveKind::R1Minus) continue;
        auto applied = apply_move_ex(m, s);
        CHECK(validate(applied.machine).valid());
        CHECK(same_key(apply_move(applied.machine, applied.inverse), m));
        did = true;
    }
    CHECK(did);
}

TEST_CASE("moves on cycles keep the bookkeeping straight") {
    // a 3-cycle acted on by an external agent, plus room for kinks and pokes
    Machine m;
    m.quandle = make_linear_rational();
    Rational a(2), u(6);
    OpLabel op = linear_op(Rational(1, 2));
    Rational b = std::get<Rational>(op_apply(m.quandle, op, a, u)); // 4
    RegId r0 = m.add_register("c0", ColorValue(a));
    RegId r1 = m.add_register("c1", ColorValue(b));
    RegId r2 = m.add_register("c2", ColorValue(b));
    RegId ru = m.add_register("u", ColorValue(u));
    m.components.push_back({true, {r0, r1, r2}});
    m.components.push_back({false, {ru}});
    Agent ag;
    ag.op = op;
    ag.patients.push_back({{0, 0}, true});  // a -> b under u
    ag.patients.push_back({{0, 2}, false}); // wrap edge c2 -> c0 backwards
    m.agents[ru] = ag;
    REQUIRE(validate(m).valid());

    int applied = 0;
    for (const auto& s : enumerate_moves(m)) {
        auto am = apply_move_ex(m, s);
        CHECK(validate(am.machine).valid());
        CHECK(invariant_profile(am.machine) == invariant_profile(m));
        CHECK(same_key(apply_move(am.machine, am.inverse), m));
        ++applied;
    }
    CHECK(applied > 50);
}

TEST_CASE("every enumerated move preserves profile and inverts (random machines)") {
    for (unsigned seed : {10u, 11u, 12u, 13u}) {
        Machine m = random_machine(seed, 9);
        auto profile = invariant_profile(m);
        auto key = canonical_key(m);
        for (const auto& s : enumerate_moves(m)) {
            AppliedMove am;
            REQUIRE_NOTHROW(am = apply_move_ex(m, s));
            CHECK(validate(am.machine).valid());
            CHECK(invariant_profile(am.machine) == profile);
            CHECK(canonical_key(apply_move(am.machine, am.inverse)) == key);
            // the inverse is not just applicable: it is an enumerated site
            bool listed = false;
            for (const auto& t : enumerate_moves(am.machine))
                if (site_matches(t, am.inverse)) { listed = true; break; }
            CHECK(listed);
        }
    }
}

TEST_CASE("canonical keys are relabeling-invariant and colour-sensitive") {
    Machine m = toy_left();
    // relabel: permute registers, components, and patient order
    Machine p;
    p.quandle = m.quandle;
    std::vector<RegId> perm = {4, 2, 0, 5, 1, 3}; // old -> new slot
    std::vector<std::string> names(m.names.size());
    std::vector<std::optional<ColorValue>> colors(m.names.size());
    for (int r = 0; r < m.reg_count(); ++r) {
        names[perm[r]] = m.names[r] + "_relabeled";
        colors[perm[r]] = m.colors[r];
    }
    p.names = names;
    p.colors = colors;
    for (int c : {2, 0, 1}) {
        Component nc = m.components[c];
        for (auto& r : nc.regs) r = perm[r];
        p.components.push_back(nc);
    }
    std::map<int, int> comp_perm{{2, 0}, {0, 1}, {1, 2}};
    for (const auto& [u, ag] : m.agents) {
        Agent na;
        na.op = ag.op;
        for (auto it = ag.patients.rbegin(); it != ag.patients.rend(); ++it) {
            PatientRef q = *it;
            q.edge.comp = comp_perm[q.edge.comp];
            na.patients.push_back(q);
        }
        p.agents[perm[u]] = na;
    }
    REQUIRE(validate(p).valid());
    CHECK(same_key(m, p));

    Machine recolored = m;
    recolored.colors[*m.find_register("x")] = ColorValue(Rational(5));
    CHECK_FALSE(same_key(m, recolored));
    CHECK_FALSE(same_key(toy_left(), toy_right()));
}

TEST_CASE("canonical keys contract concatenation seams") {
    // [a, b] with an unacted edge and equal colours collapses to one register
    Machine m;
    m.quandle = make_linear_rational();
    RegId a = m.add_register("a", ColorValue(Rational(1)));
    RegId b = m.add_register("b", ColorValue(Rational(1)));
    m.components.push_back({false, {a, b}});
    Machine n;
    n.quandle = make_linear_rational();
    n.add_register("c", ColorValue(Rational(1)));
    n.components.push_back({false, {0}});
    CHECK(same_key(m, n));
}

TEST_CASE("search: toy machines are one R3 apart") {
    Machine L = toy_left(), R = toy_right();
    SearchBudget budget;
    budget.max_moves = 4;
    auto res = search_equivalent(L, R, budget);
    REQUIRE(res.status == SearchResult::Status::Found);
    REQUIRE(res.sequence.size() == 1);
    CHECK(res.sequence[0].kind == MoveKind::R3);
    CHECK(same_key(replay_sequence(L, res.sequence), R));
}

TEST_CASE("search: identical machines need no moves; profiles refute") {
    Machine L = toy_left();
    auto self = search_equivalent(L, L, {});
    REQUIRE(self.status == SearchResult::Status::Found);
    CHECK(self.sequence.empty());

    // different terminal colours refute immediately
    Machine t1 = single_interaction(Rational(0), Rational(2), Rational(1, 2));
    Machine t2 = single_interaction(Rational(0), Rational(4), Rational(1, 2));
    auto res = search_equivalent(t1, t2, {});
    CHECK(res.status == SearchResult::Status::DistinguishedByInvariant);
    CHECK_FALSE(res.certificate.empty());
}

TEST_CASE("search budgets report inconclusive, never non-equivalence") {
    // same profile, far apart: give the search almost no room
    Machine L = toy_left(), R = toy_right();
    SearchBudget tiny;
    tiny.max_moves = 0;
    auto res = search_equivalent(L, R, tiny);
    CHECK(res.status == SearchResult::Status::NotFoundWithinBudget);
}

TEST_CASE("stale sites are rejected") {
    Machine m = single_interaction();
    auto sites = enumerate_moves(m);
    REQUIRE_FALSE(sites.empty());
    Machine changed = m;
    changed.colors[*changed.find_register("y")] = ColorValue(Rational(7));
    changed.colors[*changed.find_register("xy")] = ColorValue(Rational(7, 2));
    CHECK_THROWS_AS(apply_move(changed, sites.front()), std::domain_error);
}

TEST_CASE("randomized soundness: random walks stay reachable") {
    std::mt19937 rng(2024);
    for (unsigned seed : {21u, 22u, 23u, 24u, 25u}) {
        Machine m = random_machine(seed, 7);
        Machine walked = m;
        std::uniform_int_distribution<int> klen(1, 10);
        int k = klen(rng);
        int performed = 0;
        for (int i = 0; i < k; ++i) {
            auto sites = enumerate_moves(walked);
            // draw the move kind first so that the enormous R2+ population does
            // not dominate the walk, and shrink once the machine has grown
            std::map<MoveKind, std::vector<MoveSite>> buckets;
            for (const auto& s : sites) buckets[s.kind].push_back(s);
            if (walked.reg_count() > m.reg_count() + 3) {
                std::map<MoveKind, std::vector<MoveSite>> shrink;
                for (auto kind : {MoveKind::R1Minus, MoveKind::R2Minus})
                    if (buckets.count(kind)) shrink[kind] = buckets[kind];
                if (!shrink.empty()) buckets = std::move(shrink);
            }
            std::vector<MoveKind> kinds;
            for (const auto& [kind, v] : buckets) kinds.push_back(kind);
            const auto& bucket = buckets[kinds[rng() % kinds.size()]];
            walked = apply_move(walked, bucket[rng() % bucket.size()]);
            ++performed;
        }
        REQUIRE(performed == k);
        SearchBudget budget;
        budget.max_moves = 10;
        budget.max_states = 250000;
        budget.max_net_stabs = 4;
        auto res = search_equivalent(m, walked, budget);
        INFO("seed " << seed << " walk length " << k);
        CHECK(res.status == SearchResult::Status::Found);
        if (res.status == SearchResult::Status::Found)
            CHECK(same_key(replay_sequence(m, res.sequence), walked));
    }
}

TEST_CASE("move sequences serialize and replay through JSON") {
    Machine L = toy_left();
    auto res = search_equivalent(L, toy_right(), {});
    REQUIRE(res.status == SearchResult::Status::Found);
    json seq = json::array();
    Machine cur = L;
    for (const auto& s : res.sequence) {
        seq.push_back(move_to_json(s, cur));
        cur = apply_move(cur, s);
    }
    // re-load and replay
    Machine replayed = L;
    int step = 0;
    for (const auto& sj : seq) {
        MoveSite s = move_from_json(sj, replayed, "#/" + std::to_string(step++));
        replayed = apply_move(replayed, s);
    }
    CHECK(same_key(replayed, toy_right()));
}

TEST_CASE("stacked copies cannot reach the feed-forward unit: invariant obstruction") {
    // #registers - #crossings and the count of unacted edges between two
    // agents are move-invariant; they differ, so the search's inconclusive
    // verdict is the honest answer.
    using namespace tanglekit::markov;
    Rational s1(3, 10), s2(1, 2), s3(9, 10);
    auto mu = markov_unit(s1, s2);
    IterationSpec it;
    it.unit = mu.machine;
    it.pairs = {{"w1", "v1"}, {"w2", "v2"}};
    it.copies = 2;
    it.initial = {{"v1", ColorValue(Rational(1))}, {"v2", ColorValue(Rational(0))}};
    Machine stacked = iterate(it).chain;

    auto ff = feed_forward_unit(s1, s2, s3);
    auto sol = solve_coloring(ff.machine,
                              {{*ff.machine.find_register("a1"), ColorValue(Rational(1))},
                               {*ff.machine.find_register("a2"), ColorValue(Rational(0))}});
    REQUIRE(sol.status == ColoringResult::Status::Solved);
    Machine ffm = sol.machine;

    CHECK(invariant_profile(stacked) == invariant_profile(ffm)); // same endpoints
    auto unacted_seams = [](const Machine& m) {
        int u = 0;
        auto ea = m.edge_agents();
        for (int c = 0; c < static_cast<int>(m.components.size()); ++c)
            for (int k = 0; k < m.components[c].edge_count(); ++k)
                if (ea[c][k].first < 0) ++u;
        return u;
    };
    Machine cs = canonical_form(stacked), cf = canonical_form(ffm);
    CHECK(unacted_seams(cs) == 0);
    CHECK(unacted_seams(cf) == 1); // the double-agent seam survives contraction
    CHECK(cs.reg_count() != cf.reg_count());

    Machine aligned = stacked;
    aligned.quandle = ffm.quandle;
    SearchBudget budget;
    budget.max_moves = 6;
    budget.max_states = 8000;
    auto res = search_equivalent(aligned, ffm, budget);
    CHECK(res.status == SearchResult::Status::NotFoundWithinBudget);
}
