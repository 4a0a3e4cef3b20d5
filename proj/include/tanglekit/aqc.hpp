#pragma once

// Hamiltonian-coloured machine families over the annealing parameter
// s in (0,1): spectral gaps, the single-interaction computer, the equivalent
// triple with its level-crossing analysis, and feasibility classification.
//
// Demo Hamiltonians are real 2x2; the machinery accepts any finite dimension
// (rational symmetric or complex Hermitian colours).

#include <limits>

#include "search.hpp"

namespace tanglekit::aqc {

// --- fixed 2x2 colours ------------------------------------------------------

inline RatMatrix rat2x2(Rational a, Rational b, Rational c, Rational d) {
    RatMatrix m(2, 2);
    m.at(0, 0) = a;
    m.at(0, 1) = b;
    m.at(1, 0) = c;
    m.at(1, 1) = d;
    return m;
}

inline RatMatrix h0_matrix() { return rat2x2(Rational(0), Rational(0), Rational(0), Rational(1)); }
inline RatMatrix h1_matrix() { return rat2x2(Rational(1), Rational(0), Rational(0), Rational(0)); }
inline RatMatrix sigma_x_matrix() { return rat2x2(Rational(0), Rational(1), Rational(1), Rational(0)); }

// --- spectral gap ------------------------------------------------------------

// lambda_1 - lambda_0 with eigenvalues ascending, multiplicity counted.
// Closed form for dimension 2, cyclic Jacobi otherwise.
inline double gap(const ColorValue& h) {
    if (std::holds_alternative<RatMatrix>(h)) {
        const auto& m = std::get<RatMatrix>(h);
        if (!m.is_symmetric()) throw std::domain_error("gap: matrix is not Hermitian");
        if (m.rows == 2) {
            double a = m.at(0, 0).to_double(), b = m.at(0, 1).to_double();
            double c = m.at(1, 0).to_double(), d = m.at(1, 1).to_double();
            double tr = a + d, det = a * d - b * c;
            return std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
        }
        auto ev = symmetric_eigenvalues(m);
        return ev[1] - ev[0];
    }
    if (std::holds_alternative<ComplexMatrix>(h)) {
        const auto& m = std::get<ComplexMatrix>(h);
        if (m.hermiticity_defect() > EPS_HERM)
            throw std::domain_error("gap: matrix is not Hermitian");
        if (m.n == 2) {
            double tr = m.at(0, 0).real() + m.at(1, 1).real();
            double det = m.at(0, 0).real() * m.at(1, 1).real() - std::norm(m.at(0, 1));
            return std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
        }
        auto ev = hermitian_eigenvalues(m);
        return ev[1] - ev[0];
    }
    throw std::domain_error("gap: colour is not a matrix");
}

inline double smallest_eigenvalue(const ColorValue& h) {
    if (std::holds_alternative<RatMatrix>(h)) {
        const auto& m = std::get<RatMatrix>(h);
        if (m.rows == 2) {
            double a = m.at(0, 0).to_double(), b = m.at(0, 1).to_double();
            double c = m.at(1, 0).to_double(), d = m.at(1, 1).to_double();
            double tr = a + d, det = a * d - b * c;
            return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
        }
        return symmetric_eigenvalues(m).front();
    }
    const auto& m = std::get<ComplexMatrix>(h);
    if (m.n == 2) {
        double tr = m.at(0, 0).real() + m.at(1, 1).real();
        double det = m.at(0, 0).real() * m.at(1, 1).real() - std::norm(m.at(0, 1));
        return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    }
    return hermitian_eigenvalues(m).front();
}

// --- machine families --------------------------------------------------------

struct MachineFamily {
    std::string name;
    std::vector<std::string> registers;         // stable names across s
    std::function<Machine(const Rational&)> at; // exact parameter
};

// One interaction: input H0, agent H1, output H_out(s) = diag(s, 1-s).
inline Machine build_single_aqc_at(const Rational& s) {
    Machine m;
    m.quandle = make_hermitian_rational(2);
    OpLabel op = linear_op(s);
    RegId h0 = m.add_register("H0", ColorValue(h0_matrix()));
    RegId hout = m.add_register("Hout",
        ColorValue(std::get<RatMatrix>(op_apply(m.quandle, op, h0_matrix(), h1_matrix()))));
    RegId h1 = m.add_register("H1", ColorValue(h1_matrix()));
    m.components.push_back({false, {h0, hout}});
    m.components.push_back({false, {h1}});
    Agent a;
    a.op = op;
    a.patients.push_back({{0, 0}, true});
    m.agents[h1] = a;
    return m;
}

inline MachineFamily build_single_aqc() {
    return {"single", {"H0", "Hout", "H1"}, build_single_aqc_at};
}

// The feasible middle machine: H_out = (H0 <| sigma_x) <| H1 with
// intermediates H' = H0 <| sigma_x and sigma_x <| H1.
inline Machine build_aqc_middle_at(const Rational& s) {
    Machine m;
    m.quandle = make_hermitian_rational(2);
    OpLabel op = linear_op(s);
    auto ap = [&](const RatMatrix& x, const RatMatrix& y) {
        return std::get<RatMatrix>(op_apply(m.quandle, op, x, y));
    };
    RatMatrix hp = ap(h0_matrix(), sigma_x_matrix());
    RatMatrix hout = ap(hp, h1_matrix());
    RatMatrix sxh1 = ap(sigma_x_matrix(), h1_matrix());
    RegId rh0 = m.add_register("H0", ColorValue(h0_matrix()));
    RegId rhp = m.add_register("Hp", ColorValue(hp));
    RegId rhout = m.add_register("Hout", ColorValue(hout));
    RegId rsx = m.add_register("Sx", ColorValue(sigma_x_matrix()));
    RegId rsxh1 = m.add_register("SxH1", ColorValue(sxh1));
    RegId rh1 = m.add_register("H1", ColorValue(h1_matrix()));
    m.components.push_back({false, {rh0, rhp, rhout}});
    m.components.push_back({false, {rsx, rsxh1}});
    m.components.push_back({false, {rh1}});
    Agent asx;
    asx.op = op;
    asx.patients.push_back({{0, 0}, true});
    m.agents[rsx] = asx;
    Agent ah1;
    ah1.op = op;
    ah1.patients.push_back({{0, 1}, true});
    ah1.patients.push_back({{1, 0}, true});
    m.agents[rh1] = ah1;
    return m;
}

// R3 image of the middle machine; the recoloured pivot is H'' = H0 <| H1,
// whose gap vanishes at s = 1/2.
inline Machine build_aqc_right_at(const Rational& s) {
    Machine mid = build_aqc_middle_at(s);
    MoveSite r3;
    r3.kind = MoveKind::R3;
    r3.slider = *mid.find_register("Sx");
    r3.over = *mid.find_register("H1");
    r3.carrier = {1, 0};
    r3.pairs = {{EdgeRef{0, 0}, EdgeRef{0, 1}}};
    Machine right = apply_move(mid, r3);
    right.names[*right.find_register("Hp")] = "Hpp";
    return right;
}

// Poke of the middle machine's sigma_x strand under H0: the new interior
// register carries G = sigma_x |>^-1 H0 = (1-s)^-1 (sigma_x - s H0).
inline Machine build_aqc_left_at(const Rational& s) {
    Machine mid = build_aqc_middle_at(s);
    MoveSite r2;
    r2.kind = MoveKind::R2Plus;
    r2.comp = 1;
    r2.pos = 0;
    r2.toward_low = false;
    r2.agent = *mid.find_register("H0");
    r2.op = linear_op(s);
    r2.inverse_first = true;
    Machine left = apply_move(mid, r2);
    for (int r = 0; r < left.reg_count(); ++r) {
        if (left.names[r] == "r0") left.names[r] = "G";
        if (left.names[r] == "r1") left.names[r] = "SxIn";
    }
    return left;
}

struct AqcTriple {
    MachineFamily middle, right, left;
};

inline AqcTriple build_aqc_triple() {
    AqcTriple t;
    t.middle = {"middle", {"H0", "Hp", "Hout", "Sx", "SxH1", "H1"}, build_aqc_middle_at};
    t.right = {"right", {"H0", "Hpp", "Hout", "Sx", "SxH1", "H1"}, build_aqc_right_at};
    t.left = {"left", {"H0", "Hp", "Hout", "SxIn", "G", "Sx", "SxH1", "H1"}, build_aqc_left_at};
    return t;
}

// --- gap scans ----------------------------------------------------------------

inline std::vector<Rational> uniform_grid(int n) {
    // Open interval: the quandle needs s != 1 and G(s) has a pole at s = 1.
    std::vector<Rational> g;
    Rational lo(1, 10000), hi = Rational(1) - Rational(1, 10000);
    for (int i = 0; i < n; ++i) {
        Rational t(i, std::max(1, n - 1));
        g.push_back(lo + t * (hi - lo));
    }
    return g;
}

struct GapTrajectory {
    std::string reg;
    std::vector<double> s_values;
    std::vector<double> gaps;
};

inline std::vector<GapTrajectory> scan_gaps(const MachineFamily& fam,
                                            const std::vector<Rational>& grid) {
    std::vector<GapTrajectory> out;
    for (const auto& name : fam.registers) {
        GapTrajectory t;
        t.reg = name;
        out.push_back(t);
    }
    for (const auto& s : grid) {
        Machine m = fam.at(s);
        for (auto& t : out) {
            RegId r = *m.find_register(t.reg);
            t.s_values.push_back(s.to_double());
            t.gaps.push_back(gap(*m.colors[r]));
        }
    }
    return out;
}

struct MinGap {
    double s_star = 0.0;
    double g_star = 0.0;
};

// Grid minimum refined by golden-section between the neighbouring samples.
inline MinGap min_gap(const MachineFamily& fam, const std::string& reg,
                      const std::vector<Rational>& grid) {
    std::vector<double> xs, gs;
    for (const auto& s : grid) {
        Machine m = fam.at(s);
        RegId r = *m.find_register(reg);
        xs.push_back(s.to_double());
        gs.push_back(gap(*m.colors[r]));
    }
    size_t best = 0;
    for (size_t i = 1; i < xs.size(); ++i)
        if (gs[i] < gs[best]) best = i;

    auto eval_f = [&](double s) {
        // Snap to a nearby rational so the exact builders apply; 1e-6 grid is
        // far below every tolerance the gap minima are held to.
        long long den = 1000000LL;
        Rational rs(static_cast<long long>(std::llround(s * static_cast<double>(den))), den);
        Machine m = fam.at(rs);
        RegId r = *m.find_register(reg);
        return gap(*m.colors[r]);
    };
    double lo = xs[best > 0 ? best - 1 : best];
    double hi = xs[best + 1 < xs.size() ? best + 1 : best];
    if (lo == hi) return {xs[best], gs[best]};
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = eval_f(c), fd = eval_f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval_f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval_f(d);
        }
    }
    double sm = 0.5 * (a + b);
    double gm = eval_f(sm);
    if (gs[best] < gm) return {xs[best], gs[best]};
    return {sm, gm};
}

// --- feasibility ----------------------------------------------------------------

struct Feasibility {
    bool feasible = true;
    std::string register_name; // offending register when infeasible
    double s_star = 0.0;
    double min_gap_value = 0.0;
    std::map<std::string, MinGap> per_register;
};

// Infeasible iff some register's minimal gap over the scan is at or below
// the threshold (default: vanishing gap).
inline Feasibility classify_feasibility(const MachineFamily& fam,
                                        const std::vector<Rational>& grid,
                                        double threshold = 1e-6) {
    Feasibility f;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& reg : fam.registers) {
        MinGap mg = min_gap(fam, reg, grid);
        f.per_register[reg] = mg;
        if (mg.g_star < worst) worst = mg.g_star;
        if (mg.g_star <= threshold && f.feasible) {
            f.feasible = false;
            f.register_name = reg;
            f.s_star = mg.s_star;
            f.min_gap_value = mg.g_star;
        }
    }
    return f;
}

// lambda_0 of the named register across the grid; for the left machine's G
// the determinant -(1-s)^-2 forces a negative eigenvalue on all of [0,1).
inline std::vector<std::pair<double, double>> negative_eigenvalue_witness(
    const MachineFamily& fam, const std::string& reg, const std::vector<Rational>& grid) {
    std::vector<std::pair<double, double>> out;
    for (const auto& s : grid) {
        Machine m = fam.at(s);
        RegId r = *m.find_register(reg);
        out.push_back({s.to_double(), smallest_eigenvalue(*m.colors[r])});
    }
    return out;
}

} // namespace tanglekit::aqc
