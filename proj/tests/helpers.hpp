#pragma once

// Shared fixtures for the test suites: small canonical machines, the toy
// fusion networks, and a seeded random-machine generator (paths over the
// rational linear quandle; colours produced by the solver so every machine
// starts valid).

#include <random>

#include "tanglekit/io.hpp"
#include "tanglekit/search.hpp"

namespace tk = tanglekit;

inline tk::Machine single_interaction(tk::Rational x = tk::Rational(0),
                                      tk::Rational y = tk::Rational(2),
                                      tk::Rational s = tk::Rational(1, 2)) {
    tk::Machine m;
    m.quandle = tk::make_linear_rational();
    tk::OpLabel op = tk::linear_op(s);
    tk::ColorValue out = tk::op_apply(m.quandle, op, x, y);
    tk::RegId rx = m.add_register("x", tk::ColorValue(x));
    tk::RegId rout = m.add_register("xy", out);
    tk::RegId ry = m.add_register("y", tk::ColorValue(y));
    m.components.push_back({false, {rx, rout}});
    m.components.push_back({false, {ry}});
    tk::Agent ag;
    ag.op = op;
    ag.patients.push_back({{0, 0}, true});
    m.agents[ry] = ag;
    return m;
}

inline tk::Machine toy_left() {
    tk::Machine m;
    m.quandle = tk::make_linear_rational({tk::Rational(1, 4), tk::Rational(1, 2)});
    tk::RegId x = m.add_register("x", tk::ColorValue(tk::Rational(4)));
    tk::RegId xz = m.add_register("xz", tk::ColorValue(tk::Rational(3)));
    tk::RegId out = m.add_register("out", tk::ColorValue(tk::Rational(9, 2)));
    tk::RegId y = m.add_register("y", tk::ColorValue(tk::Rational(8)));
    tk::RegId yz = m.add_register("yz", tk::ColorValue(tk::Rational(6)));
    tk::RegId z = m.add_register("z", tk::ColorValue(tk::Rational(0)));
    m.components.push_back({false, {x, xz, out}});
    m.components.push_back({false, {y, yz}});
    m.components.push_back({false, {z}});
    tk::Agent az;
    az.op = tk::linear_op(tk::Rational(1, 4));
    az.patients.push_back({{0, 0}, true});
    az.patients.push_back({{1, 0}, true});
    m.agents[z] = az;
    tk::Agent ayz;
    ayz.op = tk::linear_op(tk::Rational(1, 2));
    ayz.patients.push_back({{0, 1}, true});
    m.agents[yz] = ayz;
    return m;
}

inline tk::Machine toy_right() {
    tk::Machine m;
    m.quandle = tk::make_linear_rational({tk::Rational(1, 4), tk::Rational(1, 2)});
    tk::RegId x = m.add_register("x", tk::ColorValue(tk::Rational(4)));
    tk::RegId xy = m.add_register("xy", tk::ColorValue(tk::Rational(6)));
    tk::RegId out = m.add_register("out", tk::ColorValue(tk::Rational(9, 2)));
    tk::RegId y = m.add_register("y", tk::ColorValue(tk::Rational(8)));
    tk::RegId yz = m.add_register("yz", tk::ColorValue(tk::Rational(6)));
    tk::RegId z = m.add_register("z", tk::ColorValue(tk::Rational(0)));
    m.components.push_back({false, {x, xy, out}});
    m.components.push_back({false, {y, yz}});
    m.components.push_back({false, {z}});
    tk::Agent ay;
    ay.op = tk::linear_op(tk::Rational(1, 2));
    ay.patients.push_back({{0, 0}, true});
    m.agents[y] = ay;
    tk::Agent az;
    az.op = tk::linear_op(tk::Rational(1, 4));
    az.patients.push_back({{0, 1}, true});
    az.patients.push_back({{1, 0}, true});
    m.agents[z] = az;
    return m;
}

// Seeded random valid machine: 1-3 path components, <= max_regs registers,
// agents drawn from the quandle's op pool, random patient edges and flags.
inline tk::Machine random_machine(unsigned seed, int max_regs = 12) {
    std::mt19937 rng(seed);
    for (int attempt = 0; attempt < 50; ++attempt) {
        tk::Machine m;
        m.quandle = tk::make_linear_rational();
        std::uniform_int_distribution<int> nregs(4, max_regs);
        int n = nregs(rng);
        std::uniform_int_distribution<int> ncomp(1, std::min(3, n / 2));
        int comps = ncomp(rng);
        std::vector<int> sizes(comps, 1);
        for (int left = n - comps; left > 0; --left) sizes[rng() % comps]++;
        int made = 0;
        for (int c = 0; c < comps; ++c) {
            tk::Component comp;
            for (int i = 0; i < sizes[c]; ++i)
                comp.regs.push_back(m.add_register("g" + std::to_string(made++)));
            m.components.push_back(std::move(comp));
        }
        // Collect all edges, shuffle, assign a prefix to random agents.
        std::vector<tk::EdgeRef> edges;
        for (int c = 0; c < comps; ++c)
            for (int k = 0; k < m.components[c].edge_count(); ++k) edges.push_back({c, k});
        std::shuffle(edges.begin(), edges.end(), rng);
        std::uniform_int_distribution<int> nagents(1, std::max(1, n / 3));
        int agents = nagents(rng);
        size_t next_edge = 0;
        for (int a = 0; a < agents && next_edge < edges.size(); ++a) {
            tk::RegId u = static_cast<tk::RegId>(rng() % n);
            if (m.is_agent(u)) continue;
            tk::Agent ag;
            ag.op = tk::sample_op(m.quandle, rng);
            std::uniform_int_distribution<int> npat(1, 3);
            int want = npat(rng);
            for (int p = 0; p < want && next_edge < edges.size(); ++p) {
                auto [ea, eb] = m.edge_ends(edges[next_edge]);
                if (ea == u || eb == u) break; // avoid accidental kinks here
                ag.patients.push_back({edges[next_edge], (rng() & 1) != 0});
                ++next_edge;
            }
            if (!ag.patients.empty()) m.agents[u] = std::move(ag);
        }
        if (m.agents.empty()) continue;

        // Colour: seed path initials, then keep seeding whatever stays stuck.
        std::map<tk::RegId, tk::ColorValue> seeds;
        for (const auto& comp : m.components)
            seeds.emplace(comp.regs.front(), tk::sample_color(m.quandle, rng));
        for (int round = 0; round < n + 2; ++round) {
            auto res = tk::solve_coloring(m, seeds);
            if (res.status == tk::ColoringResult::Status::Solved) {
                tk::Machine out = res.machine;
                if (tk::validate(out).valid()) return out;
                break;
            }
            if (res.status == tk::ColoringResult::Status::Inconsistent) break;
            seeds.emplace(res.unresolved.front(), tk::sample_color(m.quandle, rng));
        }
    }
    throw std::logic_error("random_machine: generation failed");
}

inline bool same_key(const tk::Machine& a, const tk::Machine& b) {
    return tk::canonical_key(a) == tk::canonical_key(b);
}
