#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "sislab/linear_solvers.hpp"
#include "sislab/model.hpp"
#include "sislab/operators.hpp"

namespace sislab {

enum class EquilibriumKind { DFE, ConstantEE, HeterogeneousEE };

inline const char* to_string(EquilibriumKind k) noexcept {
    switch (k) {
        case EquilibriumKind::DFE: return "DFE";
        case EquilibriumKind::ConstantEE: return "constant-EE";
        case EquilibriumKind::HeterogeneousEE: return "heterogeneous-EE";
    }
    return "?";
}

/// Steady state on a grid. `residual` is the max-norm of the steady-state
/// equations under the operator it was built from.
struct Equilibrium {
    EquilibriumKind kind;
    Field S;
    Field I;
    double residual = 0.0;
};

/// Spatially constant steady state (S, I).
struct ConstantEquilibrium {
    EquilibriumKind kind;
    double S;
    double I;
    double residual = 0.0;

    Equilibrium on(const Grid& g) const { return {kind, Field(g, S), Field(g, I), residual}; }
};

/// Max-norm residual of the chi = 0 steady-state system
///   d_S lap S - beta S^q I^p + gamma I = 0,  d_I lap I + beta S^q I^p - (gamma + mu) I = 0.
inline double steady_state_residual(const Field& S, const Field& I, const ModelParams& m,
                                    const Field& beta, const Field& gamma) {
    require_same_grid(S, I);
    const Field lapS = laplacian(S);
    const Field lapI = laplacian(I);
    double worst = 0.0;
    for (std::size_t k = 0; k < S.size(); ++k) {
        const double inc = beta[k] * pos_pow(S[k], m.q) * pos_pow(I[k], m.p);
        const double rS = m.d_S * lapS[k] - inc + gamma[k] * I[k];
        const double rI = m.d_I * lapI[k] + inc - (gamma[k] + m.mu) * I[k];
        worst = std::max({worst, std::abs(rS), std::abs(rI)});
    }
    return worst;
}

inline ConstantEquilibrium dfe(double N, double omega_measure) {
    if (!(N > 0.0) || !(omega_measure > 0.0)) throw DomainError("DFE needs N > 0 and |Omega| > 0");
    return {EquilibriumKind::DFE, N / omega_measure, 0.0, 0.0};
}

/// Unique root S* in (0, N/|Omega|) of r (N/|Omega| - S)^{1-p} = S^q, for 0 < p < 1.
/// The returned I is N/|Omega| - S* computed directly, not by subtraction.
inline ConstantEquilibrium constant_ee_sublinear(double N_over_omega, double r, double p, double q) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("constant_ee_sublinear needs 0 < p < 1");
    if (!(r > 0.0) || !(q > 0.0) || !(N_over_omega > 0.0))
        throw DomainError("constant_ee_sublinear needs r, q, N/|Omega| > 0");
    const double tau = N_over_omega;
    // Bisect on I = tau - S so that a root close to tau keeps full relative
    // precision in I.
    auto g = [&](double I) { return r * std::pow(I, 1.0 - p) - std::pow(tau - I, q); };
    double lo = 0.0, hi = tau;  // g(lo) < 0 < g(hi), g increasing
    for (;;) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    const double I = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
    return {EquilibriumKind::ConstantEE, tau - I, I, std::abs(g(I))};
}

/// (r^{1/q}, N/|Omega| - r^{1/q}) when N/|Omega| > r^{1/q}; p = 1 regime.
inline std::optional<ConstantEquilibrium> constant_ee_linear(double N_over_omega, double r, double q) {
    if (!(r > 0.0) || !(q > 0.0)) throw DomainError("constant_ee_linear needs r, q > 0");
    const double S = std::pow(r, 1.0 / q);
    if (!(N_over_omega > S)) return std::nullopt;
    return ConstantEquilibrium{EquilibriumKind::ConstantEE, S, N_over_omega - S,
                               std::abs(std::pow(S, q) - r)};
}

struct SpectralResult {
    double R0 = 0.0;
    double lambda_star = 0.0;
    Field eigenfunction;  // principal eigenfunction of the DFE linearization, unit L2 norm
    int iterations = 0;

    /// R0 - 1 and lambda_star have opposite signs. Inside `band` of the
    /// threshold either quantity counts as zero, which matches anything.
    bool sign_consistent(double band = 1e-9) const noexcept {
        const double a = R0 - 1.0;
        if (std::abs(a) <= band || std::abs(lambda_star) <= band) return true;
        return (a > 0.0) == (lambda_star < 0.0);
    }
};

namespace detail {

inline void normalize_l2(Field& x) {
    const double n = std::sqrt(inner(x, x));
    for (double& v : x.values()) v /= n;
}

inline double solver_tol(const Grid& g) { return g.dim() == 1 ? 0.0 : 1e-13; }

inline void make_positive(Field& x) {
    double s = 0.0;
    for (double v : x.values()) s += v;
    if (s < 0.0)
        for (double& v : x.values()) v = -v;
}

// Smallest eigenvalue/eigenvector of a symmetric Neumann operator by inverse
// iteration with a shift below its spectrum.
inline std::pair<double, Field> smallest_eigenpair(const NeumannOperator& M, int max_iter,
                                                   int& iterations) {
    const Grid& g = M.grid();
    const Field& r = M.reaction();
    const double shift = r.min() - 1.0;
    Field shifted = r;
    for (double& v : shifted.values()) v -= shift;
    const NeumannOperator Ms(M.diffusivity(), shifted);
    const Field diag = M.diagonal();
    double scale = 0.0;
    for (double v : diag.values()) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1.0);

    Field x(g, 1.0);
    normalize_l2(x);
    double lambda = inner(x, M.apply(x));
    for (int it = 1; it <= max_iter; ++it) {
        x = solve(Ms, x, solver_tol(g));
        make_positive(x);
        normalize_l2(x);
        const Field Mx = M.apply(x);
        const double next = inner(x, Mx);
        double res = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) res = std::max(res, std::abs(Mx[k] - next * x[k]));
        const bool done = std::abs(next - lambda) <= 1e-13 * (std::abs(next) + scale) &&
                          res <= 1e-9 * scale * linf_norm(x);
        lambda = next;
        if (done) {
            iterations += it;
            return {lambda, x};
        }
    }
    throw NonConvergenceError("inverse iteration for the principal eigenvalue did not converge");
}

}  // namespace detail

/// R0 = (N/|Omega|)^q sup int beta phi^2 / int (d_I |grad phi|^2 + gamma phi^2),
/// discretized as the top generalized eigenvalue of (N/|Omega|)^q diag(beta)
/// against d_I (-lap) + diag(gamma) (power iteration), and lambda_star, the
/// smallest eigenvalue of d_I (-lap) + diag(gamma - beta (N/|Omega|)^q)
/// (shifted inverse iteration).
inline SpectralResult basic_reproduction_number(const Field& beta, const Field& gamma, double d_I,
                                                double N_over_omega, double q,
                                                int max_iter = 200000) {
    require_same_grid(beta, gamma);
    if (!(beta.min() > 0.0) || !(gamma.min() > 0.0))
        throw DomainError("beta and gamma must be strictly positive");
    if (!(d_I >= 0.0) || !(N_over_omega > 0.0) || !(q > 0.0))
        throw DomainError("basic_reproduction_number needs d_I >= 0, N/|Omega| > 0, q > 0");
    const Grid& g = beta.grid();
    const double scale = std::pow(N_over_omega, q);
    const NeumannOperator A(d_I, gamma);

    SpectralResult out{0.0, 0.0, Field(g, 0.0), 0};
    Field x(g, 1.0);
    auto quotient = [&](const Field& v, const Field& Av) {
        double num = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) num += scale * beta[k] * v[k] * v[k];
        return num / (inner(v, Av) / g.cell_measure());
    };
    double rho = quotient(x, A.apply(x));
    bool converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        Field Bx(g, 0.0);
        for (std::size_t k = 0; k < x.size(); ++k) Bx[k] = scale * beta[k] * x[k];
        x = solve(A, Bx, detail::solver_tol(g));
        detail::normalize_l2(x);
        const Field Ax = A.apply(x);
        const double next = quotient(x, Ax);
        double res = 0.0, ref = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double b = scale * beta[k] * x[k];
            res = std::max(res, std::abs(b - next * Ax[k]));
            ref = std::max(ref, std::abs(b));
        }
        const bool done = std::abs(next - rho) <= 1e-12 * next && res <= 1e-9 * ref;
        rho = next;
        if (done) {
            out.iterations = it;
            converged = true;
            break;
        }
    }
    if (!converged) throw NonConvergenceError("power iteration for R0 did not converge");
    out.R0 = rho;

    Field reaction = gamma;
    for (std::size_t k = 0; k < reaction.size(); ++k) reaction[k] -= scale * beta[k];
    auto [lambda, phi] =
        detail::smallest_eigenpair(NeumannOperator(d_I, reaction), max_iter, out.iterations);
    out.lambda_star = lambda;
    out.eigenfunction = std::move(phi);
    return out;
}

/// Diagnostics of the monotone upper/lower iteration.
struct HeterogeneousEEResult {
    Equilibrium equilibrium;
    Field upper;   // limit of the non-increasing sequence
    Field lower;   // limit of the non-decreasing sequence
    double gap = 0.0;                      // max |upper - lower|
    double monotonicity_violation = 0.0;  // worst wrong-direction move of either sequence
    double shift = 0.0;                   // c in (d_I(-lap) + c) u_{k+1} = c u_k + F(u_k)
    double upper_start = 0.0;
    double lower_start_min = 0.0;
    int iterations = 0;
};

/// Unique positive solution U of -d_I lap U = beta (tau0 - U)^q U^p - gamma U
/// via monotone iteration from an upper and a lower solution. The returned
/// equilibrium is (S, I) = (tau0 - U, U).
inline HeterogeneousEEResult heterogeneous_ee(double tau0, const Field& beta, const Field& gamma,
                                              double d_I, double p, double q, double tol,
                                              int max_iter = 2000000) {
    require_same_grid(beta, gamma);
    if (!(tau0 > 0.0)) throw DomainError("tau0 must be > 0");
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("heterogeneous_ee needs 0 < p <= 1");
    if (!(q > 0.0) || !(d_I > 0.0) || !(tol > 0.0)) throw DomainError("need q, d_I, tol > 0");
    if (!(beta.min() > 0.0) || !(gamma.min() > 0.0))
        throw DomainError("beta and gamma must be strictly positive");
    const Grid& g = beta.grid();
    const std::size_t n = g.size();

    double min_g_over_b = INFINITY, min_b_over_g = INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
        min_g_over_b = std::min(min_g_over_b, gamma[k] / beta[k]);
        min_b_over_g = std::min(min_b_over_g, beta[k] / gamma[k]);
    }
    auto bisect_root = [](auto&& fn, double lo, double hi) {
        // fn(lo) and fn(hi) have opposite signs
        const bool lo_pos = fn(lo) > 0.0;
        for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + hi); ++i) {
            const double mid = 0.5 * (lo + hi);
            ((fn(mid) > 0.0) == lo_pos ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto reaction = [&](std::size_t k, double u) {
        return beta[k] * pos_pow(tau0 - u, q) * pos_pow(u, p) - gamma[k] * u;
    };

    // Upper solution: tau0 itself for q >= 1; for q < 1 the slope of the
    // reaction blows up at tau0, so back off to tau0 - eps with F <= 0.
    double upper_value = tau0;
    if (q < 1.0) {
        const double eps0 = bisect_root(
            [&](double e) { return std::pow(e, q) - min_g_over_b * std::pow(tau0 - e, 1.0 - p); },
            0.0, tau0);
        upper_value = tau0 - 0.5 * eps0;
    }

    HeterogeneousEEResult out{{EquilibriumKind::HeterogeneousEE, Field(g, 0.0), Field(g, 0.0), 0.0},
                              Field(g, upper_value), Field(g, 0.0)};
    out.upper_start = upper_value;

    if (p < 1.0) {
        const double delta0 = bisect_root(
            [&](double d) {
                return std::pow(tau0 - d, q) * min_b_over_g - std::pow(d, 1.0 - p);
            },
            0.0, tau0);
        out.lower = Field(g, 0.5 * delta0);
    } else {
        // p = 1: a small multiple of the principal eigenfunction is a lower
        // solution exactly when lambda_star < 0.
        Field r = gamma;
        const double s = std::pow(tau0, q);
        for (std::size_t k = 0; k < n; ++k) r[k] -= beta[k] * s;
        int its = 0;
        auto [lambda, phi] = detail::smallest_eigenpair(NeumannOperator(d_I, r), 200000, its);
        if (!(lambda < 0.0))
            throw DomainError("no positive steady state: principal eigenvalue " +
                              std::to_string(lambda) + " is not negative");
        double tau = 0.5 * upper_value / phi.max();
        for (int tries = 0;; ++tries) {
            Field cand = phi;
            for (double& v : cand.values()) v *= tau;
            const Field lap = laplacian(cand);
            bool ok = true;
            for (std::size_t k = 0; k < n && ok; ++k) {
                const double defect = d_I * lap[k] + reaction(k, cand[k]);  // must be >= 0
                ok = defect >= 0.25 * (-lambda) * cand[k];
            }
            if (ok) {
                out.lower = std::move(cand);
                break;
            }
            if (tries > 200) throw DomainError("could not construct an eigenfunction lower solution");
            tau *= 0.5;
        }
    }
    out.lower_start_min = out.lower.min();

    // Monotone shift: 1.1 x the largest -dF/du over [min lower, upper] (1024 samples).
    const double lo_u = out.lower.min(), hi_u = upper_value;
    double slope = 0.0;
    for (int s = 0; s < 1024; ++s) {
        const double u = lo_u + (hi_u - lo_u) * s / 1023.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double a = tau0 - u;
            double dF = -gamma[k];
            if (a > 0.0) {
                dF += beta[k] * p * std::pow(a, q) * std::pow(u, p - 1.0);
                dF -= beta[k] * q * std::pow(a, q - 1.0) * std::pow(u, p);
            }
            slope = std::max(slope, -dF);
        }
    }
    double gmin = gamma.min();
    out.shift = std::max(1.1 * slope, 0.1 * gmin);
    const NeumannOperator A(d_I, Field(g, out.shift));
    const double solve_tol = g.dim() == 1 ? 0.0 : std::max(1e-13, 1e-3 * tol);

    auto iterate = [&](const Field& u) {
        Field rhs(g, 0.0);
        for (std::size_t k = 0; k < n; ++k) rhs[k] = out.shift * u[k] + reaction(k, u[k]);
        return solve(A, rhs, solve_tol);
    };
    auto residual = [&](const Field& u) {
        const Field lap = laplacian(u);
        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            worst = std::max(worst, std::abs(d_I * lap[k] + reaction(k, u[k])));
        return worst;
    };

    for (int it = 1; it <= max_iter; ++it) {
        Field up = iterate(out.upper);
        Field lo = iterate(out.lower);
        double move = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            out.monotonicity_violation =
                std::max({out.monotonicity_violation, up[k] - out.upper[k], out.lower[k] - lo[k]});
            move = std::max({move, std::abs(up[k] - out.upper[k]), std::abs(lo[k] - out.lower[k])});
        }
        out.upper = std::move(up);
        out.lower = std::move(lo);
        out.gap = max_abs_diff(out.upper, out.lower);
        out.iterations = it;
        if (out.gap <= tol) {
            const double res = residual(out.upper);
            if (res <= tol) {
                out.equilibrium.I = out.upper;
                Field S(g, 0.0);
                for (std::size_t k = 0; k < n; ++k) S[k] = tau0 - out.upper[k];
                out.equilibrium.S = std::move(S);
                out.equilibrium.residual = res;
                return out;
            }
        }
        if (move <= 1e-15 * tau0 && out.gap > tol)
            throw NonUniquenessError("upper and lower monotone iterations stalled " +
                                     std::to_string(out.gap) + " apart");
    }
    throw NonConvergenceError("monotone iteration did not converge");
}

}  // namespace sislab
