#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sislab/operators.hpp"

namespace sislab {

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

namespace detail {

// Thomas sweep for the 1D operator; the matrix is strictly diagonally
// dominant when every reaction entry is positive.
inline Field solve_tridiagonal(const NeumannOperator& A, const Field& rhs) {
    const Grid& g = A.grid();
    const std::size_t n = g.size();
    const double w = A.face_weight(0);
    const Field diag = A.diagonal();

    std::vector<double> c(n, 0.0);
    std::vector<double> d(n, 0.0);
    double denom = diag[0];
    c[0] = -w / denom;
    d[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] + w * c[i - 1];
        c[i] = (i + 1 < n) ? -w / denom : 0.0;
        d[i] = (rhs[i] + w * d[i - 1]) / denom;
    }
    Field x(g, 0.0);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

inline double dot(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

// Diagonally preconditioned conjugate gradients.
inline Field solve_pcg(const NeumannOperator& A, const Field& rhs, double tol, int max_iter,
                       SolveStats* stats) {
    const Grid& g = A.grid();
    const std::size_t n = g.size();
    const Field diag = A.diagonal();
    const double bnorm = std::sqrt(dot(rhs, rhs));
    Field x(g, 0.0);
    if (bnorm == 0.0) return x;

    for (std::size_t k = 0; k < n; ++k) x[k] = rhs[k] / diag[k];
    Field r = A.apply(x);
    for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - r[k];
    Field z(g, 0.0);
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag[k];
    Field p = z;
    double rz = dot(r, z);

    for (int it = 0; it <= max_iter; ++it) {
        const double rnorm = std::sqrt(dot(r, r));
        if (rnorm <= tol * bnorm) {
            if (stats) *stats = {it, rnorm / bnorm};
            return x;
        }
        if (it == max_iter) break;
        const Field Ap = A.apply(p);
        const double alpha = rz / dot(p, Ap);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * Ap[k];
            z[k] = r[k] / diag[k];
        }
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    throw NonConvergenceError("conjugate gradient did not reach relative residual " +
                              std::to_string(tol) + " in " + std::to_string(max_iter) +
                              " iterations");
}

}  // namespace detail

/// Solves A u = rhs for a positive definite Neumann operator. 1D grids use a
/// direct tridiagonal sweep, 2D grids use Jacobi-preconditioned CG to the
/// given relative residual.
inline Field solve(const NeumannOperator& A, const Field& rhs, double tol, int max_iter = -1,
                   SolveStats* stats = nullptr) {
    require_same_grid(rhs, A.reaction());
    if (A.grid().dim() == 1) {
        Field x = detail::solve_tridiagonal(A, rhs);
        if (stats) *stats = {1, 0.0};
        return x;
    }
    if (max_iter < 0) max_iter = 10 * static_cast<int>(A.grid().size()) + 100;
    return detail::solve_pcg(A, rhs, tol, max_iter, stats);
}

}  // namespace sislab
