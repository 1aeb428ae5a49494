#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sislab/operators.hpp"
#include "sislab/stepper.hpp"

namespace sislab {

struct Record {
    double t = 0.0;
    double mass_S = 0.0;
    double mass_I = 0.0;
    double linf_S = 0.0;
    double linf_I = 0.0;
    double l2_gradS = 0.0;
    double l2_gradI = 0.0;
    std::optional<double> V1, V3, V4;
    double clamp_mass = 0.0;             // cumulative
    double cumulative_I_integral = 0.0;  // int_0^t int_Omega I
};

struct Snapshot {
    double t;
    Field S;
    Field I;
};

enum class StopReason { TEnd, Converged, Aborted };

inline const char* to_string(StopReason r) noexcept {
    switch (r) {
        case StopReason::TEnd: return "t_end";
        case StopReason::Converged: return "converged";
        case StopReason::Aborted: return "aborted";
    }
    return "?";
}

/// Outcome of step-to-step monitoring of one Lyapunov functional.
struct LyapunovVerdict {
    std::string name;
    double initial = 0.0;
    double final = 0.0;
    double max_increase = 0.0;  // max over steps of V(t_{k+1}) - V(t_k)
    double slack = 1e-8;        // relative to V(t_0)
    bool monotone() const noexcept { return max_increase <= slack * std::abs(initial); }
};

struct Trajectory {
    std::vector<Record> records;
    std::vector<Snapshot> snapshots;
    std::optional<State> final_state;
    StopReason stop_reason = StopReason::TEnd;
    std::string abort_message;
    long steps = 0;
    double cumulative_I_integral = 0.0;
    double clamp_mass_total = 0.0;
    double max_step_mass_defect = 0.0;  // worst |mass law| defect of a single step
    std::optional<LyapunovVerdict> lyapunov;
    std::vector<std::string> warnings;
};

inline Record make_record(const State& s, double cumulative_I, double clamp_total) {
    Record r;
    r.t = s.t;
    r.mass_S = integrate(s.S);
    r.mass_I = integrate(s.I);
    r.linf_S = linf_norm(s.S);
    r.linf_I = linf_norm(s.I);
    r.l2_gradS = gradient_l2(s.S);
    r.l2_gradI = gradient_l2(s.I);
    r.clamp_mass = clamp_total;
    r.cumulative_I_integral = cumulative_I;
    return r;
}

/// max over records of |M_S + M_I + mu * int_0^t int I - N| / N.
inline double mass_balance_residual(const Trajectory& traj, double mu, double N) {
    if (traj.records.empty()) throw DomainError("empty trajectory");
    double worst = 0.0;
    for (const auto& r : traj.records)
        worst = std::max(worst, std::abs(r.mass_S + r.mass_I + mu * r.cumulative_I_integral - N) / N);
    return worst;
}

/// Limit of the mean susceptible density when mu > 0:
/// (N - mu * int_0^inf int I) / |Omega|, using the run's accumulated integral.
inline double predict_S_star(const Trajectory& traj, double mu, double N, double omega_measure) {
    if (!(mu > 0.0)) throw DomainError("S_star prediction needs mu > 0");
    if (traj.records.empty()) throw DomainError("empty trajectory");
    return (N - mu * traj.records.back().cumulative_I_integral) / omega_measure;
}

namespace detail {
inline void require_positive(const Field& f, const char* name) {
    for (double v : f.values())
        if (!(v > 0.0)) throw DomainError(std::string(name) + " must be strictly positive");
}
}  // namespace detail

/// Lyapunov functional for 0 < p < 1 around the constant EE (S*, I*).
/// Uses the logarithmic S-part when q == 1.
inline double lyapunov_V1(const Field& S, const Field& I, double S_star, double I_star, double p,
                          double q) {
    require_same_grid(S, I);
    detail::require_positive(S, "S");
    detail::require_positive(I, "I");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("V1 requires 0 < p < 1");
    const double Sq = std::pow(S_star, q);
    const double Ip1 = std::pow(I_star, 1.0 - p);
    const double Ipp = std::pow(I_star, p);
    double sum = 0.0;
    for (std::size_t k = 0; k < S.size(); ++k) {
        double sPart;
        if (q == 1.0)
            sPart = S[k] - S_star - S_star * std::log(S[k] / S_star);
        else
            sPart = (S[k] - S_star) -
                    Sq / (1.0 - q) * (std::pow(S[k], 1.0 - q) - std::pow(S_star, 1.0 - q));
        const double iPart = (I[k] - I_star) - Ip1 / p * (std::pow(I[k], p) - Ipp);
        sum += sPart + iPart;
    }
    return sum * S.grid().cell_measure();
}

/// int [ (S - N/|Omega|)^2 / 2 + (r^{1/q} - N/|Omega|) I ], for R0 <= 1, p = 1.
inline double lyapunov_V3(const Field& S, const Field& I, double N_over_omega, double r, double q) {
    require_same_grid(S, I);
    const double gap = std::pow(r, 1.0 / q) - N_over_omega;
    double sum = 0.0;
    for (std::size_t k = 0; k < S.size(); ++k) {
        const double ds = S[k] - N_over_omega;
        sum += 0.5 * ds * ds + gap * I[k];
    }
    return sum * S.grid().cell_measure();
}

/// int [ (S - S^ + I - I^)^2 / 2 + (d_S + d_I)^2 / (8 d_S d_I) (S - S^)^2 ],
/// for R0 > 1, p = 1.
inline double lyapunov_V4(const Field& S, const Field& I, double S_hat, double I_hat, double d_S,
                          double d_I) {
    require_same_grid(S, I);
    const double w = (d_S + d_I) * (d_S + d_I) / (8.0 * d_S * d_I);
    double sum = 0.0;
    for (std::size_t k = 0; k < S.size(); ++k) {
        const double ds = S[k] - S_hat;
        const double tot = ds + I[k] - I_hat;
        sum += 0.5 * tot * tot + w * ds * ds;
    }
    return sum * S.grid().cell_measure();
}

/// Least-squares slope of -log(value) against t over the last half of the
/// series (at least five points).
inline double decay_rate(std::span<const std::pair<double, double>> series) {
    const std::size_t start = series.size() / 2;
    const std::size_t n = series.size() - start;
    if (n < 5) throw DomainError("decay_rate needs at least 5 points in the tail window");
    double tm = 0.0, ym = 0.0;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [t, v] = series[start + i];
        if (!(v > 0.0)) throw DomainError("decay_rate needs positive values");
        y[i] = -std::log(v);
        tm += t;
        ym += y[i];
    }
    tm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = series[start + i].first - tm;
        sxy += dt * (y[i] - ym);
        sxx += dt * dt;
    }
    if (sxx == 0.0) throw DomainError("decay_rate needs distinct times");
    return sxy / sxx;
}

/// True when every state in the window is within tol * (1 + |S_last| + |I_last|)
/// of the last one (max-norm sum over S and I).
inline bool detect_convergence(std::span<const State> window, double tol) {
    if (window.size() < 2) return false;
    const State& last = window.back();
    const double scale = 1.0 + linf_norm(last.S) + linf_norm(last.I);
    for (const auto& s : window) {
        const double d = max_abs_diff(s.S, last.S) + max_abs_diff(s.I, last.I);
        if (d > tol * scale) return false;
    }
    return true;
}

}  // namespace sislab
