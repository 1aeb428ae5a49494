#pragma once

#include <cmath>
#include <vector>

#include "sislab/grid.hpp"

namespace sislab {

/// Visits every interior face once as (left/lower cell, right/upper cell, axis).
/// Boundary faces carry zero flux under homogeneous Neumann conditions and are
/// never visited.
template <class Fn>
void for_each_interior_face(const Grid& g, Fn&& fn) {
    const int nx = g.cells(0);
    const int ny = g.cells(1);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) fn(g.index(i, j), g.index(i + 1, j), 0);
    if (g.dim() == 2)
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i < nx; ++i) fn(g.index(i, j), g.index(i, j + 1), 1);
}

/// Unit-diffusivity Neumann Laplacian: cell k receives
/// sum over its faces of (f_neighbor - f_k) / h^2.
inline Field laplacian(const Field& f) {
    const Grid& g = f.grid();
    const double inv_h2[2] = {1.0 / (g.h(0) * g.h(0)), 1.0 / (g.h(1) * g.h(1))};
    Field out(g, 0.0);
    for_each_interior_face(g, [&](std::size_t k, std::size_t kn, int axis) {
        const double flux = (f[kn] - f[k]) * inv_h2[axis];
        out[k] += flux;
        out[kn] -= flux;
    });
    return out;
}

/// Discrete divergence of S grad I in flux form. The face value of S is the
/// arithmetic mean of the two adjacent cells; boundary fluxes are zero.
inline Field cross_diffusion_div(const Field& S, const Field& I) {
    require_same_grid(S, I);
    const Grid& g = S.grid();
    const double inv_h2[2] = {1.0 / (g.h(0) * g.h(0)), 1.0 / (g.h(1) * g.h(1))};
    Field out(g, 0.0);
    for_each_interior_face(g, [&](std::size_t k, std::size_t kn, int axis) {
        const double flux = 0.5 * (S[k] + S[kn]) * (I[kn] - I[k]) * inv_h2[axis];
        out[k] += flux;
        out[kn] -= flux;
    });
    return out;
}

/// Midpoint-rule integral over the domain.
inline double integrate(const Field& f) {
    double sum = 0.0;
    for (double v : f.values()) sum += v;
    return sum * f.grid().cell_measure();
}

/// Discrete L2 norm of the gradient, from face differences.
inline double gradient_l2(const Field& f) {
    const Grid& g = f.grid();
    double sum = 0.0;
    for_each_interior_face(g, [&](std::size_t k, std::size_t kn, int axis) {
        const double d = (f[kn] - f[k]) / g.h(axis);
        sum += d * d;
    });
    return std::sqrt(sum * g.cell_measure());
}

/// The symmetric operator f -> -d * laplacian(f) + reaction .* f with
/// Neumann boundaries. Positive definite whenever d >= 0 and reaction > 0.
class NeumannOperator {
public:
    NeumannOperator(double diffusivity, Field reaction_diag)
        : d_(diffusivity), reaction_(std::move(reaction_diag)) {
        if (!(d_ >= 0.0)) throw DomainError("diffusivity must be non-negative");
    }

    const Grid& grid() const noexcept { return reaction_.grid(); }
    double diffusivity() const noexcept { return d_; }
    const Field& reaction() const noexcept { return reaction_; }

    /// Coupling weight d / h^2 across a face normal to `axis`.
    double face_weight(int axis) const noexcept {
        const double h = grid().h(axis);
        return d_ / (h * h);
    }

    Field apply(const Field& f) const {
        require_same_grid(f, reaction_);
        const Grid& g = grid();
        Field out(g, 0.0);
        for (std::size_t k = 0; k < g.size(); ++k) out[k] = reaction_[k] * f[k];
        const double w[2] = {face_weight(0), face_weight(1)};
        for_each_interior_face(g, [&](std::size_t k, std::size_t kn, int axis) {
            const double flux = (f[kn] - f[k]) * w[axis];
            out[k] -= flux;
            out[kn] += flux;
        });
        return out;
    }

    Field diagonal() const {
        const Grid& g = grid();
        Field diag = reaction_;
        const double w[2] = {face_weight(0), face_weight(1)};
        for_each_interior_face(g, [&](std::size_t k, std::size_t kn, int axis) {
            diag[k] += w[axis];
            diag[kn] += w[axis];
        });
        return diag;
    }

private:
    double d_;
    Field reaction_;
};

inline NeumannOperator neumann_stiffness(double diffusivity, Field reaction_diag) {
    return NeumannOperator(diffusivity, std::move(reaction_diag));
}

/// Discrete L2 inner product (cell-measure weighted).
inline double inner(const Field& a, const Field& b) {
    require_same_grid(a, b);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s * a.grid().cell_measure();
}

}  // namespace sislab
