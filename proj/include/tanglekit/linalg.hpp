#pragma once

// Small dense matrices over exact rationals and over complex doubles, an
// exact Gauss-Jordan solver with nullspace extraction, and a cyclic Jacobi
// eigensolver for real symmetric matrices. Hermitian complex matrices are
// handled by the standard embedding into real symmetric matrices of twice
// the dimension. Everything here is desk-scale; no blocking, nothing fancier
// than partial pivoting.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rational.hpp"

namespace tanglekit {

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

struct RatMatrix {
    int rows = 0, cols = 0;
    std::vector<Rational> a;  // row-major

    RatMatrix() = default;
    RatMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

    Rational& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const Rational& at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static RatMatrix identity(int n) {
        RatMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = Rational(1);
        return m;
    }

    bool is_symmetric() const {
        if (rows != cols) return false;
        for (int i = 0; i < rows; ++i)
            for (int j = i + 1; j < cols; ++j)
                if (at(i, j) != at(j, i)) return false;
        return true;
    }

    friend bool operator==(const RatMatrix& x, const RatMatrix& y) {
        return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
    }
};

inline RatMatrix operator*(const RatMatrix& x, const RatMatrix& y) {
    if (x.cols != y.rows) throw std::invalid_argument("matrix product: shape mismatch");
    RatMatrix r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            if (x.at(i, k).is_zero()) continue;
            for (int j = 0; j < y.cols; ++j)
                r.at(i, j) += x.at(i, k) * y.at(k, j);
        }
    return r;
}

inline RatMatrix operator+(const RatMatrix& x, const RatMatrix& y) {
    if (x.rows != y.rows || x.cols != y.cols)
        throw std::invalid_argument("matrix sum: shape mismatch");
    RatMatrix r(x.rows, x.cols);
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

inline RatMatrix operator-(const RatMatrix& x, const RatMatrix& y) {
    if (x.rows != y.rows || x.cols != y.cols)
        throw std::invalid_argument("matrix diff: shape mismatch");
    RatMatrix r(x.rows, x.cols);
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

inline RatMatrix operator*(const Rational& s, const RatMatrix& x) {
    RatMatrix r(x.rows, x.cols);
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = s * x.a[i];
    return r;
}

struct ComplexMatrix {
    int n = 0;
    std::vector<std::complex<double>> a;  // row-major, square

    ComplexMatrix() = default;
    explicit ComplexMatrix(int dim) : n(dim), a(static_cast<size_t>(dim) * dim) {}

    std::complex<double>& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    const std::complex<double>& at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

    double hermiticity_defect() const {
        double d = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d = std::max(d, std::abs(at(i, j) - std::conj(at(j, i))));
        return d;
    }
};

// ---------------------------------------------------------------------------
// Exact linear solve: A x = b with full solution-set description.
// ---------------------------------------------------------------------------

struct RatLinearSolution {
    enum class Kind { Unique, Affine, Inconsistent } kind = Kind::Inconsistent;
    std::vector<Rational> particular;            // one solution (Unique/Affine)
    std::vector<std::vector<Rational>> nullspace; // basis of homogeneous part
    std::vector<int> free_columns;               // unknowns not pinned
};

inline RatLinearSolution solve_exact(RatMatrix A, std::vector<Rational> b) {
    if (A.rows != static_cast<int>(b.size()))
        throw std::invalid_argument("solve_exact: rhs size mismatch");
    const int m = A.rows, n = A.cols;
    std::vector<int> pivot_col_of_row;
    int row = 0;
    for (int col = 0; col < n && row < m; ++col) {
        int p = -1;
        for (int i = row; i < m; ++i)
            if (!A.at(i, col).is_zero()) { p = i; break; }
        if (p < 0) continue;
        if (p != row) {
            for (int j = 0; j < n; ++j) std::swap(A.at(p, j), A.at(row, j));
            std::swap(b[p], b[row]);
        }
        Rational inv = Rational(1) / A.at(row, col);
        for (int j = col; j < n; ++j) A.at(row, j) *= inv;
        b[row] *= inv;
        for (int i = 0; i < m; ++i) {
            if (i == row || A.at(i, col).is_zero()) continue;
            Rational f = A.at(i, col);
            for (int j = col; j < n; ++j) A.at(i, j) -= f * A.at(row, j);
            b[i] -= f * b[row];
        }
        pivot_col_of_row.push_back(col);
        ++row;
    }
    RatLinearSolution sol;
    for (int i = row; i < m; ++i)
        if (!b[i].is_zero()) { sol.kind = RatLinearSolution::Kind::Inconsistent; return sol; }

    std::vector<bool> is_pivot(n, false);
    for (int c : pivot_col_of_row) is_pivot[c] = true;
    sol.particular.assign(n, Rational(0));
    for (int r = 0; r < static_cast<int>(pivot_col_of_row.size()); ++r)
        sol.particular[pivot_col_of_row[r]] = b[r];
    for (int c = 0; c < n; ++c) {
        if (is_pivot[c]) continue;
        sol.free_columns.push_back(c);
        std::vector<Rational> v(n, Rational(0));
        v[c] = Rational(1);
        for (int r = 0; r < static_cast<int>(pivot_col_of_row.size()); ++r)
            v[pivot_col_of_row[r]] = -A.at(r, c);
        sol.nullspace.push_back(std::move(v));
    }
    sol.kind = sol.free_columns.empty() ? RatLinearSolution::Kind::Unique
                                        : RatLinearSolution::Kind::Affine;
    return sol;
}

inline RatMatrix invert_exact(const RatMatrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("invert: not square");
    const int n = m.rows;
    RatMatrix inv(n, n);
    for (int col = 0; col < n; ++col) {
        std::vector<Rational> e(n, Rational(0));
        e[col] = Rational(1);
        auto s = solve_exact(m, e);
        if (s.kind != RatLinearSolution::Kind::Unique)
            throw std::domain_error("invert: singular matrix");
        for (int i = 0; i < n; ++i) inv.at(i, col) = s.particular[i];
    }
    return inv;
}

// Float variant used when machine colours live over R instead of Q.
struct FloatLinearSolution {
    enum class Kind { Unique, Affine, Inconsistent } kind = Kind::Inconsistent;
    std::vector<double> particular;
    std::vector<int> free_columns;
};

inline FloatLinearSolution solve_float(std::vector<std::vector<double>> A,
                                       std::vector<double> b, double tol = 1e-11) {
    const int m = static_cast<int>(A.size());
    const int n = m ? static_cast<int>(A[0].size()) : 0;
    std::vector<int> pivot_col_of_row;
    int row = 0;
    for (int col = 0; col < n && row < m; ++col) {
        int p = -1;
        double best = tol;
        for (int i = row; i < m; ++i)
            if (std::abs(A[i][col]) > best) { best = std::abs(A[i][col]); p = i; }
        if (p < 0) continue;
        std::swap(A[p], A[row]);
        std::swap(b[p], b[row]);
        double inv = 1.0 / A[row][col];
        for (int j = col; j < n; ++j) A[row][j] *= inv;
        b[row] *= inv;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            double f = A[i][col];
            if (std::abs(f) < tol) continue;
            for (int j = col; j < n; ++j) A[i][j] -= f * A[row][j];
            b[i] -= f * b[row];
        }
        pivot_col_of_row.push_back(col);
        ++row;
    }
    FloatLinearSolution sol;
    for (int i = row; i < m; ++i)
        if (std::abs(b[i]) > 1e-8) { sol.kind = FloatLinearSolution::Kind::Inconsistent; return sol; }
    std::vector<bool> is_pivot(n, false);
    for (int c : pivot_col_of_row) is_pivot[c] = true;
    sol.particular.assign(n, 0.0);
    for (int r = 0; r < static_cast<int>(pivot_col_of_row.size()); ++r)
        sol.particular[pivot_col_of_row[r]] = b[r];
    for (int c = 0; c < n; ++c)
        if (!is_pivot[c]) sol.free_columns.push_back(c);
    sol.kind = sol.free_columns.empty() ? FloatLinearSolution::Kind::Unique
                                        : FloatLinearSolution::Kind::Affine;
    return sol;
}

// ---------------------------------------------------------------------------
// Eigenvalues
// ---------------------------------------------------------------------------

// Cyclic Jacobi on a real symmetric matrix. Returns eigenvalues in ascending
// order. Convergence: off-diagonal Frobenius norm below tol * norm.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a,
                                              double tol = 1e-14) {
    const int n = static_cast<int>(a.size());
    for (int i = 0; i < n; ++i)
        if (static_cast<int>(a[i].size()) != n)
            throw std::invalid_argument("jacobi: not square");
    double norm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) norm += a[i][j] * a[i][j];
    norm = std::sqrt(norm);
    if (norm == 0.0) return std::vector<double>(n, 0.0);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += 2.0 * a[i][j] * a[i][j];
        if (std::sqrt(off) <= tol * norm) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Hermitian H (n x n) embeds as [[Re, -Im], [Im, Re]] whose spectrum is that
// of H with every eigenvalue doubled in multiplicity.
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h) {
    const int n = h.n;
    std::vector<std::vector<double>> e(2 * n, std::vector<double>(2 * n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            e[i][j] = h.at(i, j).real();
            e[i + n][j + n] = h.at(i, j).real();
            e[i][j + n] = -h.at(i, j).imag();
            e[i + n][j] = h.at(i, j).imag();
        }
    auto all = jacobi_eigenvalues(e);
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = 0.5 * (all[2 * i] + all[2 * i + 1]);
    return ev;
}

inline std::vector<double> symmetric_eigenvalues(const RatMatrix& m) {
    std::vector<std::vector<double>> a(m.rows, std::vector<double>(m.cols));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) a[i][j] = m.at(i, j).to_double();
    return jacobi_eigenvalues(a);
}

} // namespace tanglekit
