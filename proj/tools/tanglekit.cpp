// tanglekit command-line front end.
//
// Exit codes: 0 success, 1 domain failure (invalid machine, inconsistent
// colouring, inconclusive search), 2 usage or schema errors.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "tanglekit/aqc.hpp"
#include "tanglekit/info_flow.hpp"
#include "tanglekit/io.hpp"
#include "tanglekit/markov.hpp"
#include "tanglekit/search.hpp"

using namespace tanglekit;
using nlohmann::json;

namespace {

constexpr int EXIT_DOMAIN = 1;
constexpr int EXIT_USAGE = 2;

bool float_precision() {
    const char* env = std::getenv("TANGLEKIT_PRECISION");
    if (!env) return false;
    std::string v = env;
    if (v == "float") return true;
    if (v == "rational" || v.empty()) return false;
    throw SchemaError("TANGLEKIT_PRECISION", "expected 'rational' or 'float'");
}

json report_header(const std::string& command, unsigned seed) {
    json j;
    j["schema"] = SCHEMA_VERSION;
    j["command"] = command;
    j["seed"] = seed;
    return j;
}

json validation_to_json(const Machine& m, const ValidationReport& rep) {
    json j;
    j["valid"] = rep.valid();
    j["structural"] = rep.structural;
    json viol = json::array();
    for (const auto& v : rep.violations) {
        viol.push_back({{"component", v.edge.comp},
                        {"edge", v.edge.idx},
                        {"registers", {m.names[v.v], m.names[v.w]}},
                        {"message", v.message}});
    }
    j["violations"] = viol;
    json unc = json::array();
    for (RegId r : rep.uncolored) unc.push_back(m.names[r]);
    j["uncolored"] = unc;
    return j;
}

json profile_to_json(const InvariantProfile& p) {
    json j;
    j["paths"] = p.path_count;
    j["cycles"] = p.cycle_count;
    json ends = json::array();
    for (const auto& [a, b] : p.path_endpoints) ends.push_back({a, b});
    j["path_endpoints"] = ends;
    j["cycle_colorsets"] = p.cycle_colorsets;
    return j;
}

json matrix_to_json(const RatMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int k = 0; k < m.cols; ++k) row.push_back(m.at(i, k).str());
        rows.push_back(row);
    }
    return rows;
}

Machine maybe_float(const Machine& m) { return float_precision() ? to_float_carrier(m) : m; }

int cmd_validate(const std::string& path) {
    Machine m = load_machine(path);
    auto rep = validate(m);
    std::cout << validation_to_json(m, rep).dump(2) << "\n";
    return rep.valid() ? 0 : EXIT_DOMAIN;
}

int cmd_color(const std::string& path, const std::string& out_path) {
    Machine m = load_machine(path);
    auto res = solve_coloring(m);
    json j;
    switch (res.status) {
        case ColoringResult::Status::Solved: {
            j["status"] = "solved";
            j["machine"] = machine_to_json(res.machine);
            std::cout << j.dump(2) << "\n";
            if (!out_path.empty()) save_machine(res.machine, out_path);
            return 0;
        }
        case ColoringResult::Status::Underdetermined: {
            j["status"] = "underdetermined";
            json unresolved = json::array();
            for (RegId r : res.unresolved) unresolved.push_back(res.machine.names[r]);
            j["unresolved"] = unresolved;
            j["solution_nullity"] = res.solution_nullity;
            std::cout << j.dump(2) << "\n";
            return EXIT_DOMAIN;
        }
        case ColoringResult::Status::Inconsistent: {
            j["status"] = "inconsistent";
            j["register"] = res.conflict_reg >= 0 ? res.machine.names[res.conflict_reg] : "?";
            j["candidates"] = {res.conflict_a, res.conflict_b};
            std::cout << j.dump(2) << "\n";
            return EXIT_DOMAIN;
        }
    }
    return EXIT_DOMAIN;
}

int cmd_moves(const std::string& path) {
    Machine m = load_machine(path);
    json sites = json::array();
    for (const auto& s : enumerate_moves(m)) sites.push_back(move_to_json(s, m));
    json j;
    j["count"] = sites.size();
    j["sites"] = sites;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_replay(const std::string& path, const std::string& seq_path,
               const std::string& out_path) {
    Machine m = load_machine(path);
    std::ifstream in(seq_path);
    if (!in) throw std::runtime_error("cannot read '" + seq_path + "'");
    json seq;
    in >> seq;
    // accepts a bare array, an equiv report, or a machine document carrying
    // a "moves" attachment
    if (seq.is_object() && seq.contains("sequence")) seq = seq.at("sequence");
    else if (seq.is_object() && seq.contains("moves")) seq = seq.at("moves");
    if (!seq.is_array()) throw SchemaError(seq_path, "expected a move-sequence array");
    int step = 0;
    for (const auto& sj : seq) {
        MoveSite s = move_from_json(sj, m, seq_path + "#/" + std::to_string(step));
        m = apply_move(m, s);
        ++step;
    }
    json j;
    j["steps"] = step;
    j["machine"] = machine_to_json(m);
    std::cout << j.dump(2) << "\n";
    if (!out_path.empty()) save_machine(m, out_path);
    return 0;
}

int cmd_equiv(const std::string& pa, const std::string& pb, int max_moves, int max_states,
              int max_stabs) {
    Machine a = load_machine(pa), b = load_machine(pb);
    SearchBudget budget;
    budget.max_moves = max_moves;
    budget.max_states = max_states;
    budget.max_net_stabs = max_stabs;
    auto res = search_equivalent(a, b, budget);
    json j;
    j["states_explored"] = res.states_explored;
    switch (res.status) {
        case SearchResult::Status::Found: {
            j["status"] = "equivalent";
            json seq = json::array();
            Machine cur = a;
            for (const auto& s : res.sequence) {
                seq.push_back(move_to_json(s, cur));
                cur = apply_move(cur, s);
            }
            j["sequence"] = seq;
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        case SearchResult::Status::DistinguishedByInvariant:
            j["status"] = "distinguished";
            j["certificate"] = res.certificate;
            std::cout << j.dump(2) << "\n";
            return 0;
        case SearchResult::Status::NotFoundWithinBudget:
            j["status"] = "inconclusive";
            std::cout << j.dump(2) << "\n";
            return EXIT_DOMAIN;
    }
    return EXIT_DOMAIN;
}

int cmd_invariants(const std::string& path) {
    Machine m = load_machine(path);
    json j = profile_to_json(invariant_profile(m));
    j["canonical_key_hash"] = std::to_string(std::hash<std::string>{}(canonical_key(m)));
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_dot(const std::string& path) {
    Machine m = load_machine(path);
    std::cout << export_dot(m);
    return 0;
}

int cmd_iterate(const std::string& spec_path) {
    std::ifstream in(spec_path);
    if (!in) throw std::runtime_error("cannot read '" + spec_path + "'");
    json j;
    in >> j;
    markov::IterationSpec spec;
    spec.unit = machine_from_json(j.at("unit"), spec_path + "#/unit");
    for (const auto& pr : j.at("pairs"))
        spec.pairs.push_back({pr[0].get<std::string>(), pr[1].get<std::string>()});
    spec.copies = j.value("copies", 1);
    if (j.contains("initial"))
        for (auto it = j.at("initial").begin(); it != j.at("initial").end(); ++it)
            spec.initial[it.key()] = color_from_json(it.value(), spec_path + "#/initial");
    if (j.contains("per_copy"))
        for (const auto& pc : j.at("per_copy")) {
            std::map<std::string, ColorValue> seeds;
            for (auto it = pc.begin(); it != pc.end(); ++it)
                seeds[it.key()] = color_from_json(it.value(), spec_path + "#/per_copy");
            spec.per_copy.push_back(std::move(seeds));
        }
    auto res = markov::iterate(spec);
    json out;
    out["status"] = res.coloring.status == ColoringResult::Status::Solved ? "solved"
                  : res.coloring.status == ColoringResult::Status::Underdetermined
                      ? "underdetermined"
                      : "inconsistent";
    json traj = json::array();
    for (const auto& snap : res.boundary) {
        json row;
        for (const auto& [k, v] : snap) row[k] = color_to_json(v);
        traj.push_back(row);
    }
    out["trajectory"] = traj;
    std::cout << out.dump(2) << "\n";
    return res.coloring.status == ColoringResult::Status::Solved ? 0 : EXIT_DOMAIN;
}

int cmd_demo_info(const std::string& h0, const std::string& h1, const std::string& h2,
                  const std::string& h1g2, const std::string& h1g02, const std::string& h1g0,
                  unsigned seed) {
    info::EntropySpec spec;
    spec.H0 = Rational::parse(h0);
    spec.H1 = Rational::parse(h1);
    spec.H2 = Rational::parse(h2);
    spec.H1g2 = Rational::parse(h1g2);
    spec.H1g02 = Rational::parse(h1g02);
    if (!h1g0.empty()) spec.H1g0 = Rational::parse(h1g0);

    json j = report_header("demo-info", seed);
    j["params"] = {{"H0", h0}, {"H1", h1}, {"H2", h2}, {"H1g2", h1g2}, {"H1g02", h1g02}};
    if (!h1g0.empty()) j["params"]["H1g0"] = h1g0;
    auto viol = spec.violations();
    if (!viol.empty()) {
        j["status"] = "invalid-spec";
        j["violations"] = viol;
        std::cout << j.dump(2) << "\n";
        return EXIT_DOMAIN;
    }
    auto triple = info::build_capacity_triple(spec);
    j["t"] = triple.t.str();
    j["s"] = triple.s.str();

    auto machine_block = [&](const Machine& m, const std::vector<MoveSite>& from_right,
                             const Machine& anchored) {
        json b;
        b["machine"] = machine_to_json(maybe_float(m));
        json caps = json::array();
        for (const auto& c : info::global_capacity(m)) caps.push_back(c.str());
        b["global_capacity"] = caps;
        json cls = json::array();
        for (const auto& r : info::classify_interactions(m, spec)) {
            cls.push_back({{"in", m.names[r.in]},
                           {"out", m.names[r.out]},
                           {"agent", m.names[r.agent]},
                           {"capacity", r.capacity.str()},
                           {"class", info::interaction_class_name(r.cls)},
                           {"note", r.note}});
        }
        b["interactions"] = cls;
        if (!from_right.empty()) {
            json seq = json::array();
            for (const auto& s : from_right) seq.push_back(move_to_json(s, anchored));
            b["derivation"] = seq;
        }
        return b;
    };
    j["machines"]["right"] = machine_block(triple.right, {}, triple.right);
    j["machines"]["middle"] = machine_block(triple.middle, triple.right_to_middle, triple.right);
    j["machines"]["left"] = machine_block(triple.left, triple.middle_to_left, triple.middle);
    j["profiles_equal"] =
        invariant_profile(triple.right) == invariant_profile(triple.middle) &&
        invariant_profile(triple.middle) == invariant_profile(triple.left);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_demo_aqc(int grid_n, double threshold, const std::string& csv_path, unsigned seed) {
    json j = report_header("demo-aqc", seed);
    j["params"] = {{"grid", grid_n}, {"threshold", threshold}};
    auto grid = aqc::uniform_grid(grid_n);

    auto family_block = [&](const aqc::MachineFamily& fam) {
        json b;
        auto feas = aqc::classify_feasibility(fam, grid, threshold);
        b["feasible"] = feas.feasible;
        if (!feas.feasible) {
            b["infeasible_register"] = feas.register_name;
            b["s_star"] = feas.s_star;
            b["min_gap"] = feas.min_gap_value;
        }
        json mins;
        for (const auto& [reg, mg] : feas.per_register)
            mins[reg] = {{"s_star", mg.s_star}, {"gap", mg.g_star}};
        b["min_gaps"] = mins;
        b["machine_at_1_3"] = machine_to_json(maybe_float(fam.at(Rational(1, 3))));
        return b;
    };

    auto single = aqc::build_single_aqc();
    auto triple = aqc::build_aqc_triple();
    j["machines"]["single"] = family_block(single);
    j["machines"]["middle"] = family_block(triple.middle);
    j["machines"]["right"] = family_block(triple.right);
    j["machines"]["left"] = family_block(triple.left);

    auto wit = aqc::negative_eigenvalue_witness(triple.left, "G", grid);
    bool all_negative = true;
    for (const auto& [s, l0] : wit) all_negative &= (l0 < 0.0);
    j["G_lambda0_all_negative"] = all_negative;

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw std::runtime_error("cannot write '" + csv_path + "'");
        csv << "family,register,s,gap\n";
        for (const auto* famp : {&single, &triple.middle, &triple.right, &triple.left})
            for (const auto& t : aqc::scan_gaps(*famp, grid))
                for (size_t i = 0; i < t.s_values.size(); ++i)
                    csv << famp->name << "," << t.reg << "," << float_repr(t.s_values[i]) << ","
                        << float_repr(t.gaps[i]) << "\n";
        j["csv"] = csv_path;
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_demo_markov(const std::string& s1s, const std::string& s2s, const std::string& s3s,
                    int copies, unsigned seed) {
    Rational s1 = Rational::parse(s1s), s2 = Rational::parse(s2s);
    json j = report_header("demo-markov", seed);
    j["params"] = {{"s1", s1s}, {"s2", s2s}, {"copies", copies}};
    if (!s3s.empty()) j["params"]["s3"] = s3s;

    auto unit = markov::markov_unit(s1, s2);
    j["P"] = matrix_to_json(unit.P.p);
    j["P_row_stochastic"] = unit.P.row_stochastic();
    j["P_doubly_stochastic"] = unit.P.doubly_stochastic();
    j["machine"] = machine_to_json(maybe_float(unit.machine));

    auto st = markov::steady_state(unit.machine, {{"w1", "v1"}, {"w2", "v2"}});
    json ssj;
    switch (st.kind) {
        case markov::SteadyState::Kind::Point: ssj["kind"] = "point"; break;
        case markov::SteadyState::Kind::Set: ssj["kind"] = st.nullity == 1 ? "line" : "set"; break;
        case markov::SteadyState::Kind::Empty: ssj["kind"] = "empty"; break;
        case markov::SteadyState::Kind::NonConvergent: ssj["kind"] = "non-convergent"; break;
    }
    ssj["nullity"] = st.nullity;
    if (!st.basis.empty()) {
        json dirs = json::array();
        for (const auto& dir : st.basis) {
            json d;
            for (const auto& [r, c] : dir) d[st.closed.names[r]] = color_to_json(c);
            dirs.push_back(d);
        }
        ssj["basis"] = dirs;
    }
    j["steady_state"] = ssj;

    markov::IterationSpec it;
    it.unit = unit.machine;
    it.pairs = {{"w1", "v1"}, {"w2", "v2"}};
    it.copies = copies;
    it.initial = {{"v1", ColorValue(Rational(1))}, {"v2", ColorValue(Rational(0))}};
    auto run = markov::iterate(it);
    json traj = json::array();
    for (const auto& snap : run.boundary) {
        json row;
        for (const auto& [k, v] : snap) row[k] = color_to_json(v);
        traj.push_back(row);
    }
    j["trajectory_from_e1"] = traj;

    std::vector<markov::TransitionMatrix> steps{unit.P};
    if (!s3s.empty()) {
        Rational s3 = Rational::parse(s3s);
        auto ff = markov::feed_forward_unit(s1, s2, s3);
        auto fb = markov::feed_back_unit(s1, s2, s3);
        j["P0"] = matrix_to_json(ff.P0.p);
        j["P1"] = matrix_to_json(ff.P1.p);
        j["P0dd"] = matrix_to_json(fb.P0dd.p);
        j["T"] = matrix_to_json(fb.T.p);
        j["composite"] = matrix_to_json(fb.composite);
        j["two_step_equals_P2"] = ((ff.P1.p * ff.P0.p) == (ff.P.p * ff.P.p));
        j["composite_equals_P2"] = (fb.composite == (fb.P.p * fb.P.p));
        auto ffst = markov::internal_stability({ff.P0, ff.P1});
        j["feed_forward_stability"] = ffst.stable ? "stable" : "unstable";
        if (!ffst.stable)
            j["feed_forward_witness"] = {{"matrix", ffst.matrix_index == 0 ? "P0" : "P1"},
                                         {"row", ffst.row},
                                         {"col", ffst.col},
                                         {"value", ffst.witness.str()}};
        auto fbst = markov::internal_stability({fb.P1, fb.P0dd, fb.T});
        j["feed_back_stability"] = fbst.stable ? "stable" : "unstable";
    }
    auto base_st = markov::internal_stability(steps);
    j["unit_stability"] = base_st.stable ? "stable" : "unstable";
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tanglekit: quandle-coloured tangle machines"};
    app.require_subcommand(1);
    unsigned seed = 0;
    app.add_option("--seed", seed, "seed echoed into reports")->capture_default_str();

    std::string file, file_b, out_path, seq_path;
    int max_moves = 8, max_states = 20000, max_stabs = 2;

    auto* v = app.add_subcommand("validate", "check a machine document");
    v->add_option("machine", file)->required();

    auto* c = app.add_subcommand("color", "complete a partial colouring");
    c->add_option("machine", file)->required();
    c->add_option("--out", out_path, "write the coloured machine here");

    auto* mv = app.add_subcommand("moves", "enumerate applicable rewrite sites");
    mv->add_option("machine", file)->required();

    auto* rp = app.add_subcommand("replay", "apply a serialized move sequence");
    rp->add_option("machine", file)->required();
    rp->add_option("sequence", seq_path)->required();
    rp->add_option("--out", out_path);

    auto* eq = app.add_subcommand("equiv", "search for an equivalence certificate");
    eq->add_option("a", file)->required();
    eq->add_option("b", file_b)->required();
    eq->add_option("--max-moves", max_moves)->capture_default_str();
    eq->add_option("--max-states", max_states)->capture_default_str();
    eq->add_option("--max-stabs", max_stabs)->capture_default_str();

    auto* iv = app.add_subcommand("invariants", "print the invariant profile");
    iv->add_option("machine", file)->required();

    auto* dt = app.add_subcommand("dot", "export a deterministic DOT drawing");
    dt->add_option("machine", file)->required();

    auto* itc = app.add_subcommand("iterate", "concatenate unit copies and colour the chain");
    itc->add_option("spec", file)->required();

    std::string h0, h1, h2, h1g2, h1g02, h1g0;
    auto* di = app.add_subcommand("demo-info", "entropy-coloured capacity triple");
    di->add_option("--H0", h0)->required();
    di->add_option("--H1", h1)->required();
    di->add_option("--H2", h2)->required();
    di->add_option("--H1g2", h1g2)->required();
    di->add_option("--H1g02", h1g02)->required();
    di->add_option("--H1g0", h1g0, "optional true H(1|0)");

    int grid_n = 2001;
    double threshold = 1e-6;
    std::string csv_path;
    auto* da = app.add_subcommand("demo-aqc", "annealing gap scans and feasibility");
    da->add_option("--grid", grid_n)->capture_default_str();
    da->add_option("--threshold", threshold)->capture_default_str();
    da->add_option("--csv", csv_path, "write gap trajectories as CSV");

    std::string s1s, s2s, s3s;
    int copies = 4;
    auto* dm = app.add_subcommand("demo-markov", "Markov unit, feed-forward and feed-back");
    dm->add_option("--s1", s1s)->required();
    dm->add_option("--s2", s2s)->required();
    dm->add_option("--s3", s3s, "enable the feed-forward/feed-back analysis");
    dm->add_option("--copies", copies)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*v) return cmd_validate(file);
        if (*c) return cmd_color(file, out_path);
        if (*mv) return cmd_moves(file);
        if (*rp) return cmd_replay(file, seq_path, out_path);
        if (*eq) return cmd_equiv(file, file_b, max_moves, max_states, max_stabs);
        if (*iv) return cmd_invariants(file);
        if (*dt) return cmd_dot(file);
        if (*itc) return cmd_iterate(file);
        if (*di) return cmd_demo_info(h0, h1, h2, h1g2, h1g02, h1g0, seed);
        if (*da) return cmd_demo_aqc(grid_n, threshold, csv_path, seed);
        if (*dm) return cmd_demo_markov(s1s, s2s, s3s, copies, seed);
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return EXIT_USAGE;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return EXIT_USAGE;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_DOMAIN;
    }
    return EXIT_USAGE;
}
