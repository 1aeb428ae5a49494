#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sislab/diagnostics.hpp"
#include "sislab/stepper.hpp"

namespace sislab {

struct RunOptions {
    double t_end = 0.0;
    int record_every = 1;  // steps between diagnostic records
    std::vector<double> snapshot_times;
    bool stop_on_convergence = true;
    int convergence_window = 20;  // steps
    double convergence_tol = 1e-10;

    /// Optional functional evaluated after every step and checked for
    /// step-to-step monotone decrease.
    std::function<double(const State&)> lyapunov;
    std::string lyapunov_name;
    double lyapunov_slack = 1e-8;
};

struct Problem {
    ModelParams params;
    Field beta;
    Field gamma;
    State initial;
    StepperConfig stepper;
    RunOptions options;
};

namespace detail {
inline void set_lyapunov_column(Record& r, const std::string& name, double v) {
    if (name == "V1")
        r.V1 = v;
    else if (name == "V3")
        r.V3 = v;
    else if (name == "V4")
        r.V4 = v;
}
}  // namespace detail

/// Steps the problem to t_end, or until the convergence detector fires, or
/// until a step aborts. Aborts are reported through stop_reason with the
/// last healthy state kept as final_state.
inline Trajectory run(const Problem& pb) {
    pb.params.validate();
    pb.stepper.validate();
    const RunOptions& opt = pb.options;
    if (opt.record_every < 1) throw DomainError("record_every must be >= 1");
    if (opt.convergence_window < 2) throw DomainError("convergence window must be >= 2");

    Trajectory traj;
    State state = pb.initial;
    const double N0 = integrate(state.S) + integrate(state.I);

    std::optional<double> v_prev;
    if (opt.lyapunov) {
        const double v0 = opt.lyapunov(state);
        v_prev = v0;
        traj.lyapunov = LyapunovVerdict{opt.lyapunov_name, v0, v0, 0.0, opt.lyapunov_slack};
    }

    auto push_record = [&] {
        Record r = make_record(state, traj.cumulative_I_integral, traj.clamp_mass_total);
        if (v_prev) detail::set_lyapunov_column(r, opt.lyapunov_name, *v_prev);
        traj.records.push_back(std::move(r));
    };
    std::vector<double> pending_snapshots = opt.snapshot_times;
    std::sort(pending_snapshots.begin(), pending_snapshots.end());
    std::size_t next_snapshot = 0;
    auto take_snapshots = [&] {
        while (next_snapshot < pending_snapshots.size() &&
               state.t >= pending_snapshots[next_snapshot] - 1e-12 * (1.0 + state.t)) {
            traj.snapshots.push_back({state.t, state.S, state.I});
            ++next_snapshot;
        }
    };

    push_record();
    take_snapshots();

    std::vector<State> window;
    bool warned_guard = false, warned_shrink = false;
    const double dt = pb.stepper.dt;
    const double t_end = opt.t_end;

    while (t_end - state.t > 1e-12 * dt) {
        double h = std::min(dt, t_end - state.t);
        if (t_end - state.t - dt < 1e-9 * dt) h = t_end - state.t;

        if (pb.params.chi != 0.0 && !warned_guard &&
            h > cross_diffusion_dt_guard(state, pb.params)) {
            traj.warnings.push_back("dt exceeds the explicit cross-diffusion guard h^2/(4(d_S+|chi| max I)) at t=" +
                                    std::to_string(state.t));
            warned_guard = true;
        }

        const double mass_before = integrate(state.S) + integrate(state.I);
        std::optional<StepResult> attempt;
        try {
            attempt.emplace(step(state, pb.params, pb.beta, pb.gamma, pb.stepper, h));
        } catch (const StepAbort& e) {
            traj.stop_reason = StopReason::Aborted;
            traj.abort_message = e.what();
            break;
        }
        StepResult& res = *attempt;
        const double t_prev = state.t;
        state = std::move(res.state);
        // Keep the step grid exact at the final time.
        state.t = (h == t_end - t_prev) ? t_end : t_prev + h;
        ++traj.steps;
        traj.cumulative_I_integral += res.I_integral;
        traj.clamp_mass_total += res.clamp_mass;
        const double mass_after = integrate(state.S) + integrate(state.I);
        traj.max_step_mass_defect =
            std::max(traj.max_step_mass_defect,
                     std::abs(mass_after - mass_before + res.mu_loss - res.clamp_mass) / N0);
        if (res.shrink_level > 0 && !warned_shrink) {
            traj.warnings.push_back("step at t=" + std::to_string(t_prev) + " needed " +
                                    std::to_string(1L << res.shrink_level) + " substeps");
            warned_shrink = true;
        }

        if (opt.lyapunov) {
            const double v = opt.lyapunov(state);
            traj.lyapunov->max_increase = std::max(traj.lyapunov->max_increase, v - *v_prev);
            traj.lyapunov->final = v;
            v_prev = v;
        }
        take_snapshots();

        bool converged = false;
        if (opt.stop_on_convergence) {
            window.push_back(state);
            if (window.size() > static_cast<std::size_t>(opt.convergence_window))
                window.erase(window.begin());
            if (window.size() == static_cast<std::size_t>(opt.convergence_window))
                converged = detect_convergence(window, opt.convergence_tol);
        }
        const bool at_end = !(t_end - state.t > 1e-12 * dt);
        if (converged || at_end || traj.steps % opt.record_every == 0) push_record();
        if (converged) {
            traj.stop_reason = StopReason::Converged;
            break;
        }
    }
    if (traj.records.back().t != state.t) push_record();
    traj.final_state = state;
    return traj;
}

}  // namespace sislab
