#pragma once

#include <cmath>
#include <string>

#include "sislab/linear_solvers.hpp"
#include "sislab/model.hpp"

namespace sislab {

enum class Scheme {
    BackwardEulerDiffusion,  // first order: implicit Euler diffusion, forward Euler terms
    CrankNicolsonDiffusion,  // second order: CN diffusion, Heun (explicit trapezoid) terms
};

inline const char* to_string(Scheme s) noexcept {
    return s == Scheme::BackwardEulerDiffusion ? "backward-euler-diffusion"
                                               : "crank-nicolson-diffusion";
}

struct StepperConfig {
    double dt = 1e-2;
    Scheme scheme = Scheme::CrankNicolsonDiffusion;
    double positivity_floor = 1e-13;
    double linear_tol = 1e-10;
    int max_dt_shrink = 20;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be > 0");
        if (!(positivity_floor > 0.0) || !(positivity_floor < 1e-3))
            throw DomainError("positivity_floor must lie in (0, 1e-3)");
        if (!(linear_tol > 0.0)) throw DomainError("linear_tol must be > 0");
        if (max_dt_shrink < 0) throw DomainError("max_dt_shrink must be >= 0");
    }
};

struct State {
    Field S;
    Field I;
    double t = 0.0;
};

struct StepResult {
    State state;
    double clamp_mass = 0.0;  // mass added by flooring during this step
    double I_integral = 0.0;  // trapezoid integral of int I over the step
    double mu_loss = 0.0;     // dt * mu * (explicit int I) actually removed by the scheme
    int shrink_level = 0;     // the step was taken as 2^shrink_level substeps
};

/// Raised when a step still fails after max_dt_shrink halvings; carries the
/// last healthy state.
class StepAbort : public Error {
public:
    StepAbort(const std::string& what, State last) : Error(what), last_(std::move(last)) {}
    const State& last_state() const noexcept { return last_; }

private:
    State last_;
};

/// Solves (Id - dt * d * laplacian) u = rhs.
inline Field solve_implicit_diffusion(const Field& rhs, double d, double dt,
                                      const StepperConfig& cfg) {
    if (d < 0.0 || !(dt > 0.0)) throw DomainError("implicit diffusion needs d >= 0 and dt > 0");
    if (d == 0.0) return rhs;
    const NeumannOperator A(dt * d, Field(rhs.grid(), 1.0));
    return solve(A, rhs, cfg.linear_tol);
}

/// Largest dt for which explicit cross-diffusion is considered safe.
inline double cross_diffusion_dt_guard(const State& s, const ModelParams& m) {
    const Grid& g = s.S.grid();
    double h = g.h(0);
    if (g.dim() == 2) h = std::min(h, g.h(1));
    return h * h / (4.0 * (m.d_S + std::abs(m.chi) * linf_norm(s.I)));
}

namespace detail {

struct Rates {
    Field RS;
    Field RI;
};

// R_S = chi div(S grad I) - inc + gamma I,  R_I = inc - (gamma + mu) I.
// R_S + R_I = -mu I holds cell by cell (up to the cross-diffusion term, which
// integrates to zero).
inline Rates explicit_rates(const Field& S, const Field& I, const ModelParams& m,
                            const Field& beta, const Field& gamma) {
    const Grid& g = S.grid();
    Rates r{Field(g, 0.0), Field(g, 0.0)};
    if (m.chi != 0.0) {
        r.RS = cross_diffusion_div(S, I);
        for (std::size_t k = 0; k < g.size(); ++k) r.RS[k] *= m.chi;
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double inc = incidence(S[k], I[k], beta[k], m.p, m.q);
        r.RS[k] += gamma[k] * I[k] - inc;
        r.RI[k] = inc - (gamma[k] + m.mu) * I[k];
    }
    return r;
}

inline double clamp_to_floor(Field& f, double floor) {
    double added = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f[k] < floor) {
            added += floor - f[k];
            f[k] = floor;
        }
    }
    return added * f.grid().cell_measure();
}

struct Substep {
    Field S;
    Field I;
    double clamp_mass;
    double mu_loss;
};

inline Substep advance(const Field& S, const Field& I, double h, const ModelParams& m,
                       const Field& beta, const Field& gamma, const StepperConfig& cfg,
                       double floor) {
    const Grid& g = S.grid();
    const std::size_t n = g.size();
    const Rates r0 = explicit_rates(S, I, m, beta, gamma);
    Substep out{Field(g, 0.0), Field(g, 0.0), 0.0, 0.0};

    if (cfg.scheme == Scheme::BackwardEulerDiffusion) {
        Field rhsS = S, rhsI = I;
        for (std::size_t k = 0; k < n; ++k) {
            rhsS[k] += h * r0.RS[k];
            rhsI[k] += h * r0.RI[k];
        }
        out.S = solve_implicit_diffusion(rhsS, m.d_S, h, cfg);
        out.I = solve_implicit_diffusion(rhsI, m.d_I, h, cfg);
        out.mu_loss = h * m.mu * integrate(I);
    } else {
        const Field lapS = laplacian(S);
        const Field lapI = laplacian(I);
        Field baseS = S, baseI = I;
        for (std::size_t k = 0; k < n; ++k) {
            baseS[k] += 0.5 * h * m.d_S * lapS[k];
            baseI[k] += 0.5 * h * m.d_I * lapI[k];
        }
        Field rhsS = baseS, rhsI = baseI;
        for (std::size_t k = 0; k < n; ++k) {
            rhsS[k] += h * r0.RS[k];
            rhsI[k] += h * r0.RI[k];
        }
        Field Sp = solve_implicit_diffusion(rhsS, m.d_S, 0.5 * h, cfg);
        Field Ip = solve_implicit_diffusion(rhsI, m.d_I, 0.5 * h, cfg);
        if (!Sp.all_finite() || !Ip.all_finite()) throw NonConvergenceError("non-finite predictor");
        clamp_to_floor(Sp, floor);
        clamp_to_floor(Ip, floor);
        const Rates r1 = explicit_rates(Sp, Ip, m, beta, gamma);
        for (std::size_t k = 0; k < n; ++k) {
            baseS[k] += 0.5 * h * (r0.RS[k] + r1.RS[k]);
            baseI[k] += 0.5 * h * (r0.RI[k] + r1.RI[k]);
        }
        out.S = solve_implicit_diffusion(baseS, m.d_S, 0.5 * h, cfg);
        out.I = solve_implicit_diffusion(baseI, m.d_I, 0.5 * h, cfg);
        out.mu_loss = 0.5 * h * m.mu * (integrate(I) + integrate(Ip));
    }
    if (!out.S.all_finite() || !out.I.all_finite())
        throw NonConvergenceError("non-finite values after step");
    out.clamp_mass = clamp_to_floor(out.S, floor) + clamp_to_floor(out.I, floor);
    return out;
}

}  // namespace detail

/// Advances the state by cfg.dt. On solver failure or non-finite values the
/// interval is retried as 2, 4, ... substeps; beyond max_dt_shrink halvings
/// the step aborts.
inline StepResult step(const State& state, const ModelParams& m, const Field& beta,
                       const Field& gamma, const StepperConfig& cfg, double dt_override = 0.0) {
    require_same_grid(state.S, state.I);
    require_same_grid(state.S, beta);
    require_same_grid(state.S, gamma);
    const double dt = dt_override > 0.0 ? dt_override : cfg.dt;
    const double floor = m.needs_positive_floor() ? cfg.positivity_floor : 0.0;

    std::string last_error;
    for (int level = 0; level <= cfg.max_dt_shrink; ++level) {
        const long substeps = 1L << level;
        const double h = dt / static_cast<double>(substeps);
        try {
            StepResult res{state, 0.0, 0.0, 0.0, level};
            double I_prev = integrate(state.I);
            for (long s = 0; s < substeps; ++s) {
                auto sub = detail::advance(res.state.S, res.state.I, h, m, beta, gamma, cfg, floor);
                const double I_next = integrate(sub.I);
                res.I_integral += 0.5 * h * (I_prev + I_next);
                I_prev = I_next;
                res.clamp_mass += sub.clamp_mass;
                res.mu_loss += sub.mu_loss;
                res.state.S = std::move(sub.S);
                res.state.I = std::move(sub.I);
            }
            res.state.t = state.t + dt;
            return res;
        } catch (const NonConvergenceError& e) {
            last_error = e.what();
        }
    }
    throw StepAbort("step at t=" + std::to_string(state.t) + " failed after " +
                        std::to_string(cfg.max_dt_shrink) +
                        " dt halvings (suspected blow-up): " + last_error,
                    state);
}

}  // namespace sislab
