// End-to-end checks of the command-line tool: exit codes, JSON output
// shapes, replay round trips, and the precision switch.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "helpers.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
    std::string out_file = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                           "/tanglekit_cli_out.json";
    std::string cmd = env + " " + std::string(TANGLEKIT_CLI) + " " + args + " > " + out_file +
                      " 2>&1";
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(out_file);
    std::ostringstream os;
    os << in.rdbuf();
    r.out = os.str();
    return r;
}

std::string fixture(const char* name) {
    return std::string(TANGLEKIT_FIXTURES) + "/" + name;
}

} // namespace

TEST_CASE("cli: validate") {
    auto good = run_cli("validate " + fixture("toy-left.json"));
    CHECK(good.exit_code == 0);
    CHECK(good.out.find("\"valid\": true") != std::string::npos);

    auto bad = run_cli("validate " + fixture("broken.json"));
    CHECK(bad.exit_code == 1);
    CHECK(bad.out.find("\"violations\"") != std::string::npos);
    CHECK(bad.out.find("edge relation fails") != std::string::npos);
}

TEST_CASE("cli: equiv finds the toy R3 within budget") {
    auto r = run_cli("equiv " + fixture("toy-left.json") + " " + fixture("toy-right.json") +
                     " --max-moves 4");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"status\": \"equivalent\"") != std::string::npos);
    CHECK(r.out.find("\"kind\": \"R3\"") != std::string::npos);

    auto tight = run_cli("equiv " + fixture("toy-left.json") + " " + fixture("toy-right.json") +
                         " --max-moves 0");
    CHECK(tight.exit_code == 1);
    CHECK(tight.out.find("inconclusive") != std::string::npos);
}

TEST_CASE("cli: moves, invariants, dot, color") {
    auto mv = run_cli("moves " + fixture("toy-left.json"));
    CHECK(mv.exit_code == 0);
    CHECK(mv.out.find("\"sites\"") != std::string::npos);

    auto iv = run_cli("invariants " + fixture("toy-left.json"));
    CHECK(iv.exit_code == 0);
    CHECK(iv.out.find("\"paths\": 3") != std::string::npos);

    auto dot = run_cli("dot " + fixture("toy-left.json"));
    CHECK(dot.exit_code == 0);
    CHECK(dot.out.find("digraph machine") != std::string::npos);
    CHECK(dot.out == run_cli("dot " + fixture("toy-left.json")).out);

    // color: strip the fixture's derived colours and let the solver refill
    tk::Machine m = tk::load_machine(fixture("toy-left.json"));
    for (const auto& name : {"xz", "out", "yz"})
        m.colors[*m.find_register(name)].reset();
    std::string partial = "/tmp/tanglekit_partial.json";
    tk::save_machine(m, partial);
    auto col = run_cli("color " + partial);
    CHECK(col.exit_code == 0);
    CHECK(col.out.find("\"status\": \"solved\"") != std::string::npos);
    CHECK(col.out.find("9/2") != std::string::npos);
}

TEST_CASE("cli: replay applies a serialized sequence") {
    tk::Machine L = toy_left();
    auto res = tk::search_equivalent(L, toy_right(), {});
    REQUIRE(res.status == tk::SearchResult::Status::Found);
    nlohmann::json seq = nlohmann::json::array();
    tk::Machine cur = L;
    for (const auto& s : res.sequence) {
        seq.push_back(tk::move_to_json(s, cur));
        cur = tk::apply_move(cur, s);
    }
    std::ofstream("/tmp/tanglekit_seq.json") << seq.dump(2);
    auto r = run_cli("replay " + fixture("toy-left.json") +
                     " /tmp/tanglekit_seq.json --out /tmp/tanglekit_replayed.json");
    CHECK(r.exit_code == 0);
    tk::Machine replayed = tk::load_machine("/tmp/tanglekit_replayed.json");
    CHECK(same_key(replayed, toy_right()));
}

TEST_CASE("cli: schema errors exit 2 and name the offender") {
    std::ofstream("/tmp/tanglekit_badop.json") << R"({
      "schema": "tanglekit/1",
      "quandle": {"carrier": "rational", "families": ["linear"]},
      "registers": [{"id": "x"}],
      "components": [{"kind": "path", "registers": ["x"]}],
      "agents": [{"register": "x", "op": {"family": "warp", "s": "1/2"}, "patients": []}]
    })";
    auto r = run_cli("validate /tmp/tanglekit_badop.json");
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("warp") != std::string::npos);

    auto usage = run_cli("equivalently-wrong");
    CHECK(usage.exit_code != 0);
}

TEST_CASE("cli: demo-info reports the derived parameters") {
    auto r = run_cli("demo-info --H0 0.5 --H1 1 --H2 0.3 --H1g2 0.6 --H1g02 0.45");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"t\": \"4/7\"") != std::string::npos);
    CHECK(r.out.find("\"s\": \"7/10\"") != std::string::npos);
    CHECK(r.out.find("\"profiles_equal\": true") != std::string::npos);
    CHECK(r.out.find("abstract") != std::string::npos);

    auto flt = run_cli("demo-info --H0 0.5 --H1 1 --H2 0.3 --H1g2 0.6 --H1g02 0.45",
                       "TANGLEKIT_PRECISION=float");
    CHECK(flt.exit_code == 0);
    CHECK(flt.out.find("\"carrier\": \"float\"") != std::string::npos);

    auto bad = run_cli("demo-info --H0 0.5 --H1 1 --H2 0.7 --H1g2 0.6 --H1g02 0.45");
    CHECK(bad.exit_code == 1);
    CHECK(bad.out.find("invalid-spec") != std::string::npos);
}

TEST_CASE("cli: demo-aqc flags the right machine as infeasible near 1/2") {
    auto r = run_cli("demo-aqc --grid 401 --csv /tmp/tanglekit_gaps.csv");
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["machines"]["middle"]["feasible"] == true);
    CHECK(j["machines"]["left"]["feasible"] == true);
    CHECK(j["machines"]["right"]["feasible"] == false);
    CHECK(j["machines"]["right"]["infeasible_register"] == "Hpp");
    CHECK(std::abs(j["machines"]["right"]["s_star"].get<double>() - 0.5) < 1e-3);
    CHECK(j["machines"]["single"]["feasible"] == false);
    CHECK(j["G_lambda0_all_negative"] == true);
    std::ifstream csv("/tmp/tanglekit_gaps.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "family,register,s,gap");
}

TEST_CASE("cli: demo-markov emits matrices, verdicts, and the steady line") {
    auto r = run_cli("demo-markov --s1 0.3 --s2 0.5 --s3 0.9 --copies 3");
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["P"][0][0] == "1/2");
    CHECK(j["P0"][0][0] == "23/10");
    CHECK(j["T"][0][1] == "-9");
    CHECK(j["steady_state"]["kind"] == "line");
    CHECK(j["two_step_equals_P2"] == true);
    CHECK(j["feed_forward_stability"] == "unstable");
    CHECK(j["feed_forward_witness"]["value"] == "23/10");
    CHECK(j["unit_stability"] == "stable");
    CHECK(j["trajectory_from_e1"].size() == 4);
}

TEST_CASE("cli: iterate runs a spec document") {
    nlohmann::json spec;
    spec["unit"] = tk::machine_to_json(tk::load_machine(fixture("toy-left.json")));
    // reuse the basic unit instead: simpler pairs
    tk::Machine unit;
    unit.quandle = tk::make_linear_rational();
    tk::RegId x = unit.add_register("x");
    tk::RegId xu = unit.add_register("xu");
    tk::RegId u = unit.add_register("u");
    unit.components.push_back({false, {x, xu}});
    unit.components.push_back({false, {u}});
    tk::Agent ag;
    ag.op = tk::linear_op(tk::Rational(1, 2));
    ag.patients.push_back({{0, 0}, true});
    unit.agents[u] = ag;
    spec["unit"] = tk::machine_to_json(unit);
    spec["pairs"] = nlohmann::json::array({nlohmann::json::array({"xu", "x"})});
    spec["copies"] = 2;
    spec["initial"] = {{"x", {{"type", "rational"}, {"value", "1"}}}};
    spec["per_copy"] = nlohmann::json::array(
        {{{"u", {{"type", "rational"}, {"value", "0"}}}},
         {{"u", {{"type", "rational"}, {"value", "0"}}}}});
    std::ofstream("/tmp/tanglekit_iter.json") << spec.dump(2);
    auto r = run_cli("iterate /tmp/tanglekit_iter.json");
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["status"] == "solved");
    CHECK(j["trajectory"].back()["xu"]["value"] == "1/4");
}
