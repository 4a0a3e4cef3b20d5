#pragma once

// Machine persistence (versioned JSON schema "tanglekit/1"), move-sequence
// serialization for replay, and deterministic DOT export.
//
// Schema sketch:
//   { "schema": "tanglekit/1",
//     "quandle": {...},
//     "registers": [{"id": "x", "color": {...}}, ...],
//     "components": [{"kind": "path"|"cycle", "registers": ["x", ...]}],
//     "agents": [{"register": "y",
//                 "op": {"family": "linear", "s": "1/2", "inverse": false},
//                 "patients": [{"edge": ["v","w"], "direction": "v→w"}]}],
//     "moves": [...] }                                   // optional
//
// Rational colours round-trip exactly; floats are written with 17 significant
// digits. Schema violations throw SchemaError carrying a JSON-pointer-style
// location.

#include <fstream>

#include <json.hpp>

#include "moves.hpp"

namespace tanglekit {

inline constexpr const char* SCHEMA_VERSION = "tanglekit/1";

struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what) {}
};

using nlohmann::json;

// --- scalars and colours -----------------------------------------------------

inline json scalar_to_json(const Scalar& s) {
    if (s.exact) return json(s.r.str());
    return json(s.f);
}

inline Scalar scalar_from_json(const json& j, const std::string& where) {
    if (j.is_string()) {
        try {
            return Scalar(Rational::parse(j.get<std::string>()));
        } catch (const std::exception& e) {
            throw SchemaError(where, e.what());
        }
    }
    if (j.is_number()) return Scalar(j.get<double>());
    throw SchemaError(where, "expected a rational string or a number");
}

inline json color_to_json(const ColorValue& c) {
    json j;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Rational>) {
                j = {{"type", "rational"}, {"value", x.str()}};
            } else if constexpr (std::is_same_v<T, double>) {
                j = {{"type", "float"}, {"value", x}};
            } else if constexpr (std::is_same_v<T, RatVec>) {
                json v = json::array();
                for (const auto& e : x.v) v.push_back(e.str());
                j = {{"type", "rational_vector"}, {"value", v}};
            } else if constexpr (std::is_same_v<T, FloatVec>) {
                j = {{"type", "float_vector"}, {"value", x.v}};
            } else if constexpr (std::is_same_v<T, RatMatrix>) {
                json rows = json::array();
                for (int i = 0; i < x.rows; ++i) {
                    json row = json::array();
                    for (int k = 0; k < x.cols; ++k) row.push_back(x.at(i, k).str());
                    rows.push_back(row);
                }
                j = {{"type", "matrix_rational"}, {"rows", rows}};
            } else if constexpr (std::is_same_v<T, ComplexMatrix>) {
                json rows = json::array();
                for (int i = 0; i < x.n; ++i) {
                    json row = json::array();
                    for (int k = 0; k < x.n; ++k)
                        row.push_back({{"re", x.at(i, k).real()}, {"im", x.at(i, k).imag()}});
                    rows.push_back(row);
                }
                j = {{"type", "matrix_complex"}, {"rows", rows}};
            } else if constexpr (std::is_same_v<T, Permutation>) {
                j = {{"type", "permutation"}, {"map", x.map}};
            } else if constexpr (std::is_same_v<T, FiniteElem>) {
                j = {{"type", "finite"}, {"index", x.index}};
            }
        },
        c);
    return j;
}

inline ColorValue color_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("type"))
        throw SchemaError(where, "colour must be an object with a 'type'");
    std::string t = j.at("type").get<std::string>();
    try {
        if (t == "rational") return Rational::parse(j.at("value").get<std::string>());
        if (t == "float") return j.at("value").get<double>();
        if (t == "rational_vector") {
            RatVec v;
            for (const auto& e : j.at("value")) v.v.push_back(Rational::parse(e.get<std::string>()));
            return v;
        }
        if (t == "float_vector") {
            FloatVec v;
            for (const auto& e : j.at("value")) v.v.push_back(e.get<double>());
            return v;
        }
        if (t == "matrix_rational") {
            const auto& rows = j.at("rows");
            int n = static_cast<int>(rows.size());
            int m = n ? static_cast<int>(rows[0].size()) : 0;
            RatMatrix mat(n, m);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < m; ++k)
                    mat.at(i, k) = Rational::parse(rows[i][k].get<std::string>());
            return mat;
        }
        if (t == "matrix_complex") {
            const auto& rows = j.at("rows");
            int n = static_cast<int>(rows.size());
            ComplexMatrix mat(n);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    mat.at(i, k) = {rows[i][k].at("re").get<double>(),
                                    rows[i][k].at("im").get<double>()};
            return mat;
        }
        if (t == "permutation") {
            Permutation p;
            p.map = j.at("map").get<std::vector<int>>();
            return p;
        }
        if (t == "finite") return FiniteElem{j.at("index").get<int>()};
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        throw SchemaError(where, e.what());
    }
    throw SchemaError(where + "/type", "unknown colour type '" + t + "'");
}

// --- quandles ------------------------------------------------------------------

inline const char* carrier_name(Carrier c) {
    switch (c) {
        case Carrier::RationalScalar: return "rational";
        case Carrier::FloatScalar: return "float";
        case Carrier::RationalVector: return "rational_vector";
        case Carrier::FloatVector: return "float_vector";
        case Carrier::HermitianRational: return "hermitian_rational";
        case Carrier::HermitianComplex: return "hermitian_complex";
        case Carrier::PermutationGroup: return "permutation";
        case Carrier::MatrixGroup: return "matrix_group";
        case Carrier::Finite: return "finite";
    }
    return "?";
}

inline const char* family_name(OpFamily f) {
    switch (f) {
        case OpFamily::Linear: return "linear";
        case OpFamily::Loglinear: return "loglinear";
        case OpFamily::Conjugation: return "conjugation";
        case OpFamily::Table: return "table";
        case OpFamily::Kauffman: return "kauffman";
    }
    return "?";
}

inline json quandle_to_json(const Quandle& q) {
    json j;
    j["carrier"] = carrier_name(q.carrier);
    json fams = json::array();
    for (auto f : q.families) fams.push_back(family_name(f));
    j["families"] = fams;
    if (q.dim != 1) j["dim"] = q.dim;
    if (q.modulus) j["p"] = q.modulus;
    if (q.finite_size) j["size"] = q.finite_size;
    if (!q.tables.empty()) j["tables"] = q.tables;
    if (!q.op_pool.empty()) {
        json pool = json::array();
        for (const auto& s : q.op_pool) pool.push_back(scalar_to_json(s));
        j["op_pool"] = pool;
    }
    return j;
}

inline Quandle quandle_from_json(const json& j, const std::string& where) {
    Quandle q;
    std::string c = j.at("carrier").get<std::string>();
    if (c == "rational") q.carrier = Carrier::RationalScalar;
    else if (c == "float") q.carrier = Carrier::FloatScalar;
    else if (c == "rational_vector") q.carrier = Carrier::RationalVector;
    else if (c == "float_vector") q.carrier = Carrier::FloatVector;
    else if (c == "hermitian_rational") q.carrier = Carrier::HermitianRational;
    else if (c == "hermitian_complex") q.carrier = Carrier::HermitianComplex;
    else if (c == "permutation") q.carrier = Carrier::PermutationGroup;
    else if (c == "matrix_group") q.carrier = Carrier::MatrixGroup;
    else if (c == "finite") q.carrier = Carrier::Finite;
    else throw SchemaError(where + "/carrier", "unknown carrier '" + c + "'");
    q.dim = j.value("dim", 1);
    q.modulus = j.value("p", 0);
    q.finite_size = j.value("size", q.modulus);
    for (const auto& f : j.at("families")) {
        std::string fn = f.get<std::string>();
        if (fn == "linear") q.families.insert(OpFamily::Linear);
        else if (fn == "loglinear") q.families.insert(OpFamily::Loglinear);
        else if (fn == "conjugation") q.families.insert(OpFamily::Conjugation);
        else if (fn == "table") q.families.insert(OpFamily::Table);
        else if (fn == "kauffman") q.families.insert(OpFamily::Kauffman);
        else throw SchemaError(where + "/families", "unknown family '" + fn + "'");
    }
    if (j.contains("tables")) {
        Quandle t = make_table(j.at("tables").get<std::vector<std::vector<int>>>(),
                               q.finite_size);
        q.tables = t.tables;
        q.inv_tables = t.inv_tables;
    }
    if (j.contains("op_pool"))
        for (const auto& s : j.at("op_pool"))
            q.op_pool.push_back(scalar_from_json(s, where + "/op_pool"));
    return q;
}

// --- op labels -------------------------------------------------------------------

inline json op_to_json(const OpLabel& op) {
    json j;
    j["family"] = family_name(op.family);
    if (op.family == OpFamily::Linear || op.family == OpFamily::Loglinear)
        j["s"] = scalar_to_json(op.param);
    if (op.family == OpFamily::Table) j["index"] = op.table_index;
    j["inverse"] = op.inverse;
    return j;
}

inline OpLabel op_from_json(const json& j, const std::string& where) {
    OpLabel op;
    std::string f = j.at("family").get<std::string>();
    if (f == "linear") op.family = OpFamily::Linear;
    else if (f == "loglinear") op.family = OpFamily::Loglinear;
    else if (f == "conjugation") op.family = OpFamily::Conjugation;
    else if (f == "table") op.family = OpFamily::Table;
    else if (f == "kauffman") op.family = OpFamily::Kauffman;
    else throw SchemaError(where + "/family", "unknown op family '" + f + "'");
    if (op.family == OpFamily::Linear || op.family == OpFamily::Loglinear) {
        if (!j.contains("s")) throw SchemaError(where, "linear/loglinear op needs 's'");
        op.param = scalar_from_json(j.at("s"), where + "/s");
    }
    op.table_index = j.value("index", 0);
    op.inverse = j.value("inverse", false);
    return op;
}

// --- machines ----------------------------------------------------------------------

inline json machine_to_json(const Machine& m) {
    json j;
    j["schema"] = SCHEMA_VERSION;
    j["quandle"] = quandle_to_json(m.quandle);
    json regs = json::array();
    for (int r = 0; r < m.reg_count(); ++r) {
        json e;
        e["id"] = m.names[r];
        if (m.colors[r]) e["color"] = color_to_json(*m.colors[r]);
        regs.push_back(e);
    }
    j["registers"] = regs;
    json comps = json::array();
    for (const auto& c : m.components) {
        json e;
        e["kind"] = c.cycle ? "cycle" : "path";
        json rr = json::array();
        for (RegId r : c.regs) rr.push_back(m.names[r]);
        e["registers"] = rr;
        comps.push_back(e);
    }
    j["components"] = comps;
    json agents = json::array();
    for (const auto& [u, ag] : m.agents) {
        json e;
        e["register"] = m.names[u];
        e["op"] = op_to_json(ag.op);
        json pats = json::array();
        for (const auto& p : ag.patients) {
            auto [a, b] = m.edge_ends(p.edge);
            json pe;
            pe["edge"] = {m.names[a], m.names[b]};
            pe["direction"] = p.from_first ? "v→w" : "w→v";
            pats.push_back(pe);
        }
        e["patients"] = pats;
        agents.push_back(e);
    }
    j["agents"] = agents;
    return j;
}

inline Machine machine_from_json(const json& j, const std::string& where = "#") {
    if (!j.is_object()) throw SchemaError(where, "machine document must be an object");
    if (!j.contains("schema") || j.at("schema").get<std::string>() != SCHEMA_VERSION)
        throw SchemaError(where + "/schema",
                          "unsupported schema version (want '" + std::string(SCHEMA_VERSION) + "')");
    Machine m;
    m.quandle = quandle_from_json(j.at("quandle"), where + "/quandle");
    std::map<std::string, RegId> byname;
    int ridx = 0;
    for (const auto& e : j.at("registers")) {
        std::string id = e.at("id").get<std::string>();
        if (byname.count(id))
            throw SchemaError(where + "/registers/" + std::to_string(ridx),
                              "duplicate register id '" + id + "'");
        std::optional<ColorValue> col;
        if (e.contains("color"))
            col = color_from_json(e.at("color"),
                                  where + "/registers/" + std::to_string(ridx) + "/color");
        byname[id] = m.add_register(id, col);
        ++ridx;
    }
    int cidx = 0;
    for (const auto& e : j.at("components")) {
        std::string kind = e.at("kind").get<std::string>();
        if (kind != "path" && kind != "cycle")
            throw SchemaError(where + "/components/" + std::to_string(cidx) + "/kind",
                              "expected 'path' or 'cycle'");
        Component c;
        c.cycle = (kind == "cycle");
        for (const auto& rn : e.at("registers")) {
            auto it = byname.find(rn.get<std::string>());
            if (it == byname.end())
                throw SchemaError(where + "/components/" + std::to_string(cidx),
                                  "unknown register '" + rn.get<std::string>() + "'");
            c.regs.push_back(it->second);
        }
        m.components.push_back(std::move(c));
        ++cidx;
    }

    // Edge lookup: parallel edges are consumed in order of appearance.
    std::map<std::pair<RegId, RegId>, std::vector<EdgeRef>> edges;
    for (int c = 0; c < static_cast<int>(m.components.size()); ++c)
        for (int k = 0; k < m.components[c].edge_count(); ++k) {
            auto [a, b] = m.edge_ends({c, k});
            edges[{a, b}].push_back({c, k});
        }
    auto take_edge = [&](RegId a, RegId b, const std::string& at) -> std::pair<EdgeRef, bool> {
        auto it = edges.find({a, b});
        if (it != edges.end() && !it->second.empty()) {
            EdgeRef e = it->second.front();
            it->second.erase(it->second.begin());
            return {e, true}; // stored order (a, b)
        }
        it = edges.find({b, a});
        if (it != edges.end() && !it->second.empty()) {
            EdgeRef e = it->second.front();
            it->second.erase(it->second.begin());
            return {e, false}; // stored order (b, a)
        }
        throw SchemaError(at, "no such edge [" + m.names[a] + "," + m.names[b] + "]");
    };

    int aidx = 0;
    for (const auto& e : j.at("agents")) {
        std::string base = where + "/agents/" + std::to_string(aidx);
        std::string rn = e.at("register").get<std::string>();
        auto it = byname.find(rn);
        if (it == byname.end()) throw SchemaError(base, "unknown register '" + rn + "'");
        Agent ag;
        ag.op = op_from_json(e.at("op"), base + "/op");
        int pidx = 0;
        for (const auto& pe : e.at("patients")) {
            std::string pbase = base + "/patients/" + std::to_string(pidx);
            const auto& names = pe.at("edge");
            if (!names.is_array() || names.size() != 2)
                throw SchemaError(pbase + "/edge", "expected a pair of register ids");
            auto va = byname.find(names[0].get<std::string>());
            auto vb = byname.find(names[1].get<std::string>());
            if (va == byname.end() || vb == byname.end())
                throw SchemaError(pbase + "/edge", "unknown register in edge");
            std::string dir = pe.at("direction").get<std::string>();
            if (dir != "v→w" && dir != "w→v")
                throw SchemaError(pbase + "/direction", "expected 'v→w' or 'w→v'");
            auto [edge, listed_order] = take_edge(va->second, vb->second, pbase + "/edge");
            PatientRef p;
            p.edge = edge;
            bool input_is_first_listed = (dir == "v→w");
            p.from_first = listed_order ? input_is_first_listed : !input_is_first_listed;
            ag.patients.push_back(p);
            ++pidx;
        }
        if (m.agents.count(it->second))
            throw SchemaError(base, "register '" + rn + "' listed as agent twice");
        m.agents[it->second] = std::move(ag);
        ++aidx;
    }

    auto structural = check_structure(m);
    if (!structural.empty()) throw SchemaError(where, structural.front());
    return m;
}

inline void save_machine(const Machine& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << machine_to_json(m).dump(2) << "\n";
}

inline Machine load_machine(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError(path, e.what());
    }
    return machine_from_json(j);
}

// --- move sites -----------------------------------------------------------------

inline json edgeref_to_json(const EdgeRef& e) { return {{"component", e.comp}, {"edge", e.idx}}; }

inline EdgeRef edgeref_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("component") || !j.contains("edge"))
        throw SchemaError(where, "expected {component, edge}");
    return {j.at("component").get<int>(), j.at("edge").get<int>()};
}

inline json move_to_json(const MoveSite& s, const Machine& anchored_on) {
    json j;
    j["kind"] = move_kind_name(s.kind);
    j["fingerprint"] = s.fingerprint;
    auto reg = [&](RegId r) { return anchored_on.names.at(r); };
    switch (s.kind) {
        case MoveKind::R1Plus:
            j["anchor"] = reg(s.anchor);
            j["after"] = s.insert_after;
            j["agent_new"] = s.agent_new;
            j["from_first"] = s.from_first;
            j["op"] = op_to_json(s.op);
            break;
        case MoveKind::R1Minus: j["edge"] = edgeref_to_json(s.edge); break;
        case MoveKind::R2Plus:
            j["component"] = s.comp;
            j["pos"] = s.pos;
            j["toward_low"] = s.toward_low;
            j["agent"] = reg(s.agent);
            j["op"] = op_to_json(s.op);
            j["inverse_first"] = s.inverse_first;
            break;
        case MoveKind::R2Minus: j["middle"] = reg(s.middle); break;
        case MoveKind::R3: {
            j["slider"] = reg(s.slider);
            j["over"] = reg(s.over);
            j["carrier"] = edgeref_to_json(s.carrier);
            json pr = json::array();
            for (const auto& [a, b] : s.pairs)
                pr.push_back({{"patient", edgeref_to_json(a)}, {"companion", edgeref_to_json(b)}});
            j["pairs"] = pr;
            break;
        }
        case MoveKind::StabPlus:
            j["register"] = reg(s.anchor);
            j["op"] = op_to_json(s.op);
            break;
        case MoveKind::StabMinus: j["register"] = reg(s.anchor); break;
    }
    return j;
}

inline MoveSite move_from_json(const json& j, const Machine& anchored_on,
                               const std::string& where) {
    MoveSite s;
    std::string kind = j.at("kind").get<std::string>();
    auto reg = [&](const json& v, const std::string& at) -> RegId {
        auto r = anchored_on.find_register(v.get<std::string>());
        if (!r) throw SchemaError(at, "unknown register '" + v.get<std::string>() + "'");
        return *r;
    };
    if (kind == "R1+") {
        s.kind = MoveKind::R1Plus;
        s.anchor = reg(j.at("anchor"), where + "/anchor");
        s.insert_after = j.value("after", true);
        s.agent_new = j.value("agent_new", false);
        s.from_first = j.value("from_first", true);
        s.op = op_from_json(j.at("op"), where + "/op");
    } else if (kind == "R1-") {
        s.kind = MoveKind::R1Minus;
        s.edge = edgeref_from_json(j.at("edge"), where + "/edge");
    } else if (kind == "R2+") {
        s.kind = MoveKind::R2Plus;
        s.comp = j.at("component").get<int>();
        s.pos = j.at("pos").get<int>();
        s.toward_low = j.value("toward_low", true);
        s.agent = reg(j.at("agent"), where + "/agent");
        s.op = op_from_json(j.at("op"), where + "/op");
        s.inverse_first = j.value("inverse_first", false);
    } else if (kind == "R2-") {
        s.kind = MoveKind::R2Minus;
        s.middle = reg(j.at("middle"), where + "/middle");
    } else if (kind == "R3") {
        s.kind = MoveKind::R3;
        s.slider = reg(j.at("slider"), where + "/slider");
        s.over = reg(j.at("over"), where + "/over");
        s.carrier = edgeref_from_json(j.at("carrier"), where + "/carrier");
        for (const auto& pr : j.at("pairs"))
            s.pairs.push_back({edgeref_from_json(pr.at("patient"), where + "/pairs"),
                               edgeref_from_json(pr.at("companion"), where + "/pairs")});
    } else if (kind == "Stab+") {
        s.kind = MoveKind::StabPlus;
        s.anchor = reg(j.at("register"), where + "/register");
        s.op = op_from_json(j.at("op"), where + "/op");
    } else if (kind == "Stab-") {
        s.kind = MoveKind::StabMinus;
        s.anchor = reg(j.at("register"), where + "/register");
    } else {
        throw SchemaError(where + "/kind", "unknown move kind '" + kind + "'");
    }
    s.fingerprint = j.value("fingerprint", uint64_t{0});
    return s;
}

// --- DOT export ------------------------------------------------------------------

// Deterministic rendering: registers as labelled ellipses, every acted edge
// routed through a point-shaped crossing node so the agent's dashed bold link
// has a target; solid process edges run input -> output.
inline std::string export_dot(const Machine& m) {
    std::ostringstream os;
    os << "digraph machine {\n";
    os << "  rankdir=LR;\n";
    os << "  node [shape=ellipse, fontsize=10];\n";
    for (int r = 0; r < m.reg_count(); ++r) {
        os << "  \"" << m.names[r] << "\" [label=\"" << m.names[r];
        if (m.colors[r]) os << "\\n" << color_str(*m.colors[r]);
        if (m.is_agent(r)) os << "\\n[" << m.agents.at(r).op.key() << "]";
        os << "\"];\n";
    }
    auto ea = m.edge_agents();
    for (int c = 0; c < static_cast<int>(m.components.size()); ++c) {
        for (int k = 0; k < m.components[c].edge_count(); ++k) {
            auto [a, b] = m.edge_ends({c, k});
            auto [u, patient] = ea[c][k];
            if (u < 0) {
                os << "  \"" << m.names[a] << "\" -> \"" << m.names[b] << "\" [dir=none];\n";
                continue;
            }
            std::string cross = "x" + std::to_string(c) + "_" + std::to_string(k);
            os << "  \"" << cross << "\" [shape=point, width=0.08];\n";
            RegId in = patient->from_first ? a : b;
            RegId out = patient->from_first ? b : a;
            os << "  \"" << m.names[in] << "\" -> \"" << cross << "\" [arrowhead=none];\n";
            os << "  \"" << cross << "\" -> \"" << m.names[out] << "\";\n";
            os << "  \"" << m.names[u] << "\" -> \"" << cross
               << "\" [style=dashed, penwidth=2.0, label=\"" << m.agents.at(u).op.key()
               << "\", fontsize=9];\n";
        }
    }
    os << "}\n";
    return os.str();
}

} // namespace tanglekit
