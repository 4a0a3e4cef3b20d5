#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "tanglekit/markov.hpp"

using namespace tanglekit;

TEST_CASE("validate accepts the single interaction and flags perturbations") {
    Machine m = single_interaction();
    CHECK(validate(m).valid());

    Machine bad = m;
    bad.colors[*bad.find_register("xy")] = ColorValue(Rational(2));
    auto rep = validate(bad);
    CHECK_FALSE(rep.valid());
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].edge == EdgeRef{0, 0});
}

TEST_CASE("structural checks catch overlapping patient edges") {
    Machine m = single_interaction();
    // second agent acting on the already-acted edge
    Agent extra;
    extra.op = linear_op(Rational(1, 4));
    extra.patients.push_back({{0, 0}, true});
    m.agents[*m.find_register("x")] = extra;
    auto errs = check_structure(m);
    REQUIRE_FALSE(errs.empty());
}

TEST_CASE("solve_coloring propagates forward and backward") {
    Machine m = single_interaction();
    for (auto& c : m.colors) c.reset();
    RegId x = *m.find_register("x"), xy = *m.find_register("xy"), y = *m.find_register("y");

    auto fwd = solve_coloring(m, {{x, ColorValue(Rational(0))}, {y, ColorValue(Rational(2))}});
    REQUIRE(fwd.status == ColoringResult::Status::Solved);
    CHECK(std::get<Rational>(*fwd.machine.colors[xy]) == Rational(1));
    CHECK(validate(fwd.machine).valid());

    auto bwd = solve_coloring(m, {{xy, ColorValue(Rational(1))}, {y, ColorValue(Rational(2))}});
    REQUIRE(bwd.status == ColoringResult::Status::Solved);
    CHECK(std::get<Rational>(*bwd.machine.colors[x]) == Rational(0));

    auto under = solve_coloring(m, {{x, ColorValue(Rational(0))}});
    CHECK(under.status == ColoringResult::Status::Underdetermined);
    CHECK_FALSE(under.unresolved.empty());
}

TEST_CASE("inconsistent constraints yield a witness") {
    // A 2-cycle with one acted edge forces x <| y = x; seed it falsely.
    Machine m;
    m.quandle = make_linear_rational();
    RegId a = m.add_register("a", ColorValue(Rational(0)));
    RegId b = m.add_register("b", ColorValue(Rational(5)));
    RegId u = m.add_register("u", ColorValue(Rational(2)));
    m.components.push_back({true, {a, b}});
    m.components.push_back({false, {u}});
    Agent ag;
    ag.op = linear_op(Rational(1, 2));
    ag.patients.push_back({{0, 0}, true});
    m.agents[u] = ag;
    auto res = solve_coloring(m);
    CHECK(res.status == ColoringResult::Status::Inconsistent);
    CHECK(res.conflict_reg >= 0);
    CHECK_FALSE(res.conflict_a.empty());
}

TEST_CASE("solve_coloring is confluent under worklist reordering") {
    Machine m = toy_left();
    std::map<RegId, ColorValue> seeds;
    for (const auto& name : {"x", "y", "z"})
        seeds.emplace(*m.find_register(name), *m.colors[*m.find_register(name)]);
    Machine blank = m;
    for (auto& c : blank.colors) c.reset();
    for (auto& [r, c] : seeds) blank.colors[r] = c;

    std::string reference;
    for (int order = 0; order < 16; ++order) {
        auto res = solve_coloring(blank, {}, order);
        REQUIRE(res.status == ColoringResult::Status::Solved);
        std::string key = canonical_key(res.machine);
        if (order == 0) reference = key;
        else CHECK(key == reference);
    }
}

TEST_CASE("affine phase resolves cyclic constraints propagation cannot") {
    // closure of the basic unit: x <| u = x on a one-register cycle, u free.
    Machine unit = markov::basic_unit(Rational(1, 2));
    unit.colors[*unit.find_register("u")] = ColorValue(Rational(3));
    Pairing pr;
    pr.pairs.push_back({*unit.find_register("xu"), *unit.find_register("x")});
    Machine closed = closure(unit, pr);
    auto res = solve_coloring(closed);
    REQUIRE(res.status == ColoringResult::Status::Solved);
    // steady state of x = (x + 3)/2 is x = 3
    for (int r = 0; r < res.machine.reg_count(); ++r)
        if (res.machine.names[r] == "x" || res.machine.names[r] == "xu")
            CHECK(std::get<Rational>(*res.machine.colors[r]) == Rational(3));
}

TEST_CASE("processes and endpoints") {
    Machine m = single_interaction();
    auto procs = processes(m);
    REQUIRE(procs.size() == 2);
    CHECK_FALSE(procs[0].control);
    CHECK_FALSE(procs[1].control);
    auto [ins, outs] = endpoints(m);
    CHECK(ins.size() == 2);
    CHECK(outs.size() == 2);

    auto mu = markov::markov_unit(Rational(3, 10), Rational(1, 2));
    auto mp = processes(mu.machine);
    int cycles = 0;
    for (const auto& p : mp) cycles += p.control;
    CHECK(mp.size() == 2);
    CHECK(cycles == 0);

    Pairing pr;
    pr.pairs.push_back({*mu.machine.find_register("w1"), *mu.machine.find_register("v1")});
    pr.pairs.push_back({*mu.machine.find_register("w2"), *mu.machine.find_register("v2")});
    Machine closed = closure(mu.machine, pr);
    auto cp = processes(closed);
    int closed_cycles = 0;
    for (const auto& p : cp) closed_cycles += p.control;
    CHECK(cp.size() == 2);
    CHECK(closed_cycles == 2);
}

TEST_CASE("concatenation merges endpoint registers") {
    Machine a = single_interaction();
    Machine b = single_interaction();
    Pairing pr;
    // output colour of a is 1; b must start from 1 for the pairing to unify
    b.colors[*b.find_register("x")] = ColorValue(Rational(1));
    b.colors[*b.find_register("xy")] = ColorValue(Rational(3, 2));
    pr.pairs.push_back({*a.find_register("xy"), *b.find_register("x")});
    Machine m = concatenate(a, b, pr, ".1");
    CHECK(validate(m).valid());
    // 3-register chain plus the two agent strands
    REQUIRE(m.components.size() == 3);
    bool found_chain = false;
    for (const auto& c : m.components) found_chain |= (c.regs.size() == 3);
    CHECK(found_chain);
    // colours of non-paired registers are preserved
    CHECK(std::get<Rational>(*m.colors[*m.find_register("y")]) == Rational(2));
    CHECK(std::get<Rational>(*m.colors[*m.find_register("y.1")]) == Rational(2));
}

TEST_CASE("concatenation rejects colour mismatches and non-endpoints") {
    Machine a = single_interaction();
    Machine b = single_interaction(); // b.x = 0 but a.xy = 1
    Pairing bad;
    bad.pairs.push_back({*a.find_register("xy"), *b.find_register("x")});
    CHECK_THROWS_AS(concatenate(a, b, bad, ".1"), std::domain_error);

    Machine c = single_interaction();
    c.colors[*c.find_register("x")].reset(); // uncoloured side inherits instead
    Pairing ok;
    ok.pairs.push_back({*a.find_register("xy"), *c.find_register("x")});
    Machine m = concatenate(a, c, ok, ".1");
    CHECK(std::get<Rational>(*m.colors[*m.find_register("xy")]) == Rational(1));

    Pairing nonend;
    nonend.pairs.push_back({*a.find_register("x"), *c.find_register("x")}); // x is initial
    CHECK_THROWS_AS(concatenate(a, c, nonend, ".2"), std::domain_error);
}

TEST_CASE("closing the basic unit on a constant colour gives a steady cycle") {
    Machine unit = markov::basic_unit(Rational(1, 2));
    Rational c(5, 7);
    unit.colors[*unit.find_register("x")] = ColorValue(c);
    unit.colors[*unit.find_register("xu")] = ColorValue(c);
    unit.colors[*unit.find_register("u")] = ColorValue(c);
    Pairing pr;
    pr.pairs.push_back({*unit.find_register("xu"), *unit.find_register("x")});
    Machine closed = closure(unit, pr);
    CHECK(validate(closed).valid());
    REQUIRE(closed.components.size() == 2);
    CHECK((closed.components[0].cycle || closed.components[1].cycle));
}

TEST_CASE("machine JSON round trip is canonical") {
    for (unsigned seed : {1u, 2u, 3u}) {
        Machine m = random_machine(seed);
        json j = machine_to_json(m);
        Machine back = machine_from_json(j);
        CHECK(same_key(m, back));
    }
}

TEST_CASE("round trips cover finite, permutation, and matrix carriers") {
    {
        Machine m;
        m.quandle = make_kauffman(7);
        OpLabel op;
        op.family = OpFamily::Kauffman;
        RegId a = m.add_register("a", ColorValue(FiniteElem{2}));
        RegId c = m.add_register("c", ColorValue(FiniteElem{4})); // 2*3-2 mod 7
        RegId b = m.add_register("b", ColorValue(FiniteElem{3}));
        m.components.push_back({false, {a, c}});
        m.components.push_back({false, {b}});
        Agent ag;
        ag.op = op;
        ag.patients.push_back({{0, 0}, true});
        m.agents[b] = ag;
        REQUIRE(validate(m).valid());
        CHECK(same_key(m, machine_from_json(machine_to_json(m))));
    }
    {
        Machine m;
        m.quandle = make_conjugation_perm(3);
        OpLabel op;
        op.family = OpFamily::Conjugation;
        Permutation x{{1, 0, 2}}, y{{1, 2, 0}};
        auto z = op_apply(m.quandle, op, x, y);
        RegId rx = m.add_register("x", ColorValue(x));
        RegId rz = m.add_register("z", z);
        RegId ry = m.add_register("y", ColorValue(y));
        m.components.push_back({false, {rx, rz}});
        m.components.push_back({false, {ry}});
        Agent ag;
        ag.op = op;
        ag.patients.push_back({{0, 0}, true});
        m.agents[ry] = ag;
        REQUIRE(validate(m).valid());
        CHECK(same_key(m, machine_from_json(machine_to_json(m))));
    }
    {
        // rational Hermitian colours (exact) survive the trip bit-for-bit
        Machine m;
        m.quandle = make_hermitian_rational(2);
        RatMatrix h(2, 2);
        h.at(0, 0) = Rational(1, 3);
        h.at(0, 1) = h.at(1, 0) = Rational(-2, 7);
        h.at(1, 1) = Rational(5);
        RegId r = m.add_register("h", ColorValue(h));
        m.components.push_back({false, {r}});
        Machine back = machine_from_json(machine_to_json(m));
        CHECK(std::get<RatMatrix>(*back.colors[0]) == h);
    }
    {
        // complex Hermitian colours round-trip exactly at 17 digits
        Machine m;
        m.quandle = make_hermitian_complex(2);
        ComplexMatrix h(2);
        h.at(0, 0) = 0.125;
        h.at(0, 1) = {0.25, -0.5};
        h.at(1, 0) = {0.25, 0.5};
        h.at(1, 1) = -1.75;
        RegId r = m.add_register("h", ColorValue(h));
        m.components.push_back({false, {r}});
        Machine back = machine_from_json(machine_to_json(m));
        CHECK(color_equal(*back.colors[0], ColorValue(h), 0.0));
    }
}

TEST_CASE("fixtures load, validate, and match the built-in builders") {
    Machine left = load_machine(std::string(TANGLEKIT_FIXTURES) + "/toy-left.json");
    Machine right = load_machine(std::string(TANGLEKIT_FIXTURES) + "/toy-right.json");
    CHECK(validate(left).valid());
    CHECK(validate(right).valid());
    CHECK(same_key(left, toy_left()));
    CHECK(same_key(right, toy_right()));

    Machine broken = load_machine(std::string(TANGLEKIT_FIXTURES) + "/broken.json");
    CHECK_FALSE(validate(broken).valid());
}

TEST_CASE("schema violations are located and named") {
    json j = machine_to_json(single_interaction());
    j["agents"][0]["op"]["family"] = "frobnicate";
    try {
        machine_from_json(j);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("frobnicate") != std::string::npos);
        CHECK(std::string(e.what()).find("/agents/0/op") != std::string::npos);
    }

    json v = machine_to_json(single_interaction());
    v["schema"] = "tanglekit/99";
    CHECK_THROWS_AS(machine_from_json(v), SchemaError);
}

TEST_CASE("float colours serialize with 17 significant digits") {
    Machine m;
    m.quandle = make_linear_float();
    double val = 0.1234567890123456789;
    RegId r = m.add_register("x", ColorValue(val));
    m.components.push_back({false, {r}});
    json j = machine_to_json(m);
    Machine back = machine_from_json(j);
    CHECK(std::get<double>(*back.colors[0]) == val);
}

TEST_CASE("DOT export is deterministic and structured") {
    Machine m = single_interaction();
    std::string d1 = export_dot(m), d2 = export_dot(m);
    CHECK(d1 == d2);
    // one crossing node, one dashed agent link, register labels present
    CHECK(d1.find("x0_0") != std::string::npos);
    CHECK(d1.find("style=dashed") != std::string::npos);
    CHECK(d1.find("\"y\"") != std::string::npos);

    auto mu = markov::markov_unit(Rational(3, 10), Rational(1, 2));
    std::string dm = export_dot(mu.machine);
    // 4 registers + 2 crossing nodes, 2 dashed agent links
    size_t links = 0, pos = 0;
    while ((pos = dm.find("style=dashed", pos)) != std::string::npos) {
        ++links;
        pos += 1;
    }
    CHECK(links == 2);
    size_t points = 0;
    pos = 0;
    while ((pos = dm.find("shape=point", pos)) != std::string::npos) {
        ++points;
        pos += 1;
    }
    CHECK(points == 2);
}
