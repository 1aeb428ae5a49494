#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sislab/classifier.hpp"
#include "sislab/diagnostics.hpp"
#include "sislab/equilibria.hpp"
#include "sislab/run.hpp"

namespace sislab {

using json = nlohmann::json;

/// Text form of a double that round-trips exactly (17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Scenario {
    std::string id;
    Grid grid = Grid::line(1.0, 3);
    ModelParams params;
    Field beta = Field(grid, 1.0);
    Field gamma = Field(grid, 1.0);
    Field S0 = Field(grid, 1.0);
    Field I0 = Field(grid, 1.0);
    StepperConfig stepper;
    double t_end = 0.0;
    int record_every = 1;
    std::vector<double> snapshot_times;
    bool convergence_enabled = true;
    int convergence_window = 20;
    double convergence_tol = 1e-10;
    std::set<std::string> analyses;
    json config;  // normalized input with every default filled in
};

inline const std::set<std::string>& known_analyses() {
    static const std::set<std::string> k{"certificate", "prediction", "R0",
                                         "equilibria",  "lyapunov",   "rates"};
    return k;
}

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& msg) {
    throw ParseError("scenario " + (path.empty() ? std::string("root") : "'" + path + "'") + ": " +
                         msg,
                     std::string::npos);
}

inline std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

inline void check_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
    if (!obj.is_object()) schema_error(path, "expected an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) schema_error(join_path(path, k), "unknown key");
}

inline double number_at(const json& obj, const std::string& key, const std::string& path,
                        std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        schema_error(join_path(path, key), "required number is missing");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) schema_error(join_path(path, key), "expected a number");
    return v.get<double>();
}

inline int integer_at(const json& obj, const std::string& key, const std::string& path,
                      std::optional<int> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        schema_error(join_path(path, key), "required integer is missing");
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) schema_error(join_path(path, key), "expected an integer");
    return v.get<int>();
}

inline CoefficientField coefficient_at(const json& v, const std::string& path) {
    if (v.is_number()) return CoefficientField::constant(v.get<double>());
    if (v.is_string()) {
        try {
            return CoefficientField::expression(v.get<std::string>());
        } catch (const ParseError& e) {
            throw ParseError("scenario '" + path + "': " + e.what(), e.position());
        }
    }
    if (v.is_array()) {
        std::vector<double> vals;
        for (const auto& x : v) {
            if (!x.is_number()) schema_error(path, "tabulated values must be numbers");
            vals.push_back(x.get<double>());
        }
        return CoefficientField::tabulated(std::move(vals));
    }
    schema_error(path, "expected a number, an expression string or an array");
}

inline Field evaluate_at(const CoefficientField& c, const Grid& g, const std::string& path) {
    try {
        return c.evaluate(g);
    } catch (const StructuralError& e) {
        schema_error(path, e.what());
    }
}

}  // namespace detail

/// Builds a fully validated Scenario from a JSON tree.
inline Scenario parse_scenario(const json& root) {
    using namespace detail;
    check_keys(root, "",
               {"id", "domain", "params", "beta", "gamma", "initial", "stepper", "t_end", "output",
                "convergence", "analyses"});
    Scenario sc;
    json& cfg = sc.config;

    if (!root.contains("id") || !root["id"].is_string() || root["id"].get<std::string>().empty())
        schema_error("id", "required non-empty string");
    sc.id = root["id"].get<std::string>();
    cfg["id"] = sc.id;

    // domain
    if (!root.contains("domain")) schema_error("domain", "required object is missing");
    const json& dom = root["domain"];
    check_keys(dom, "domain", {"dim", "extents", "cells"});
    const int dim = integer_at(dom, "dim", "domain");
    if (dim != 1 && dim != 2) schema_error("domain.dim", "must be 1 or 2");
    for (const char* key : {"extents", "cells"})
        if (!dom.contains(key) || !dom[key].is_array() || dom[key].size() != std::size_t(dim))
            schema_error(std::string("domain.") + key, "expected an array of length dim");
    std::vector<double> extents;
    std::vector<int> cells;
    for (int a = 0; a < dim; ++a) {
        if (!dom["extents"][a].is_number()) schema_error("domain.extents", "expected numbers");
        if (!dom["cells"][a].is_number_integer()) schema_error("domain.cells", "expected integers");
        extents.push_back(dom["extents"][a].get<double>());
        cells.push_back(dom["cells"][a].get<int>());
        if (cells.back() < 3) throw DomainError("domain.cells must be >= 3 on every axis");
    }
    sc.grid = dim == 1 ? Grid::line(extents[0], cells[0])
                       : Grid::rect(extents[0], extents[1], cells[0], cells[1]);
    cfg["domain"] = {{"dim", dim}, {"extents", extents}, {"cells", cells}};

    // params
    const json params = root.value("params", json::object());
    check_keys(params, "params", {"d_S", "d_I", "chi", "mu", "p", "q"});
    const ModelParams def;
    sc.params.d_S = number_at(params, "d_S", "params", def.d_S);
    sc.params.d_I = number_at(params, "d_I", "params", def.d_I);
    sc.params.chi = number_at(params, "chi", "params", def.chi);
    sc.params.mu = number_at(params, "mu", "params", def.mu);
    sc.params.p = number_at(params, "p", "params", def.p);
    sc.params.q = number_at(params, "q", "params", def.q);
    if (auto v = sc.params.violations(); !v.empty()) {
        std::string msg = "invalid parameters:";
        for (const auto& s : v) msg += " [" + s + "]";
        throw DomainError(msg);
    }
    cfg["params"] = {{"d_S", sc.params.d_S}, {"d_I", sc.params.d_I}, {"chi", sc.params.chi},
                     {"mu", sc.params.mu},   {"p", sc.params.p},     {"q", sc.params.q}};

    // coefficients
    for (const char* key : {"beta", "gamma"}) {
        if (!root.contains(key)) schema_error(key, "required coefficient is missing");
        const auto coef = coefficient_at(root[key], key);
        evaluate_at(coef, sc.grid, key);
        Field f = materialize_coefficient(coef, sc.grid);
        (std::string(key) == "beta" ? sc.beta : sc.gamma) = std::move(f);
        cfg[key] = root[key];
    }

    // initial data
    if (!root.contains("initial")) schema_error("initial", "required object is missing");
    const json& ini = root["initial"];
    check_keys(ini, "initial", {"S", "I"});
    for (const char* key : {"S", "I"})
        if (!ini.contains(key)) schema_error(std::string("initial.") + key, "required field is missing");
    sc.S0 = evaluate_at(coefficient_at(ini["S"], "initial.S"), sc.grid, "initial.S");
    sc.I0 = evaluate_at(coefficient_at(ini["I"], "initial.I"), sc.grid, "initial.I");
    if (auto v = validate_initial_data(sc.S0, sc.I0, sc.params.p, sc.params.q); !v.empty())
        throw AdmissibilityError(std::move(v));
    cfg["initial"] = ini;

    // stepper
    const json st = root.value("stepper", json::object());
    check_keys(st, "stepper", {"dt", "scheme", "positivity_floor", "linear_tol", "max_dt_shrink"});
    const StepperConfig sdef;
    sc.stepper.dt = number_at(st, "dt", "stepper", sdef.dt);
    if (st.contains("scheme")) {
        const json& s = st["scheme"];
        if (s == "crank-nicolson-diffusion")
            sc.stepper.scheme = Scheme::CrankNicolsonDiffusion;
        else if (s == "backward-euler-diffusion")
            sc.stepper.scheme = Scheme::BackwardEulerDiffusion;
        else
            schema_error("stepper.scheme",
                         "expected \"crank-nicolson-diffusion\" or \"backward-euler-diffusion\"");
    }
    sc.stepper.positivity_floor = number_at(st, "positivity_floor", "stepper", sdef.positivity_floor);
    sc.stepper.linear_tol = number_at(st, "linear_tol", "stepper", sdef.linear_tol);
    sc.stepper.max_dt_shrink = integer_at(st, "max_dt_shrink", "stepper", sdef.max_dt_shrink);
    sc.stepper.validate();
    cfg["stepper"] = {{"dt", sc.stepper.dt},
                      {"scheme", to_string(sc.stepper.scheme)},
                      {"positivity_floor", sc.stepper.positivity_floor},
                      {"linear_tol", sc.stepper.linear_tol},
                      {"max_dt_shrink", sc.stepper.max_dt_shrink}};

    sc.t_end = number_at(root, "t_end", "");
    if (!(sc.t_end >= 0.0) || !std::isfinite(sc.t_end)) throw DomainError("t_end must be >= 0");
    cfg["t_end"] = sc.t_end;

    const json out = root.value("output", json::object());
    check_keys(out, "output", {"record_every", "snapshots"});
    sc.record_every = integer_at(out, "record_every", "output", 1);
    if (sc.record_every < 1) throw DomainError("output.record_every must be >= 1");
    if (out.contains("snapshots")) {
        if (!out["snapshots"].is_array()) schema_error("output.snapshots", "expected an array");
        for (const auto& t : out["snapshots"]) {
            if (!t.is_number()) schema_error("output.snapshots", "expected numbers");
            sc.snapshot_times.push_back(t.get<double>());
        }
        std::sort(sc.snapshot_times.begin(), sc.snapshot_times.end());
    }
    cfg["output"] = {{"record_every", sc.record_every}, {"snapshots", sc.snapshot_times}};

    const json conv = root.value("convergence", json::object());
    check_keys(conv, "convergence", {"enabled", "window", "tol"});
    if (conv.contains("enabled")) {
        if (!conv["enabled"].is_boolean()) schema_error("convergence.enabled", "expected a boolean");
        sc.convergence_enabled = conv["enabled"].get<bool>();
    }
    sc.convergence_window = integer_at(conv, "window", "convergence", 20);
    sc.convergence_tol = number_at(conv, "tol", "convergence", 1e-10);
    if (sc.convergence_window < 2) throw DomainError("convergence.window must be >= 2");
    if (!(sc.convergence_tol > 0.0)) throw DomainError("convergence.tol must be > 0");
    cfg["convergence"] = {{"enabled", sc.convergence_enabled},
                          {"window", sc.convergence_window},
                          {"tol", sc.convergence_tol}};

    if (root.contains("analyses")) {
        if (!root["analyses"].is_array()) schema_error("analyses", "expected an array of names");
        for (const auto& a : root["analyses"]) {
            if (!a.is_string() || !known_analyses().count(a.get<std::string>()))
                schema_error("analyses", "unknown analysis " + a.dump());
            sc.analyses.insert(a.get<std::string>());
        }
    } else {
        sc.analyses = {"certificate", "prediction"};
    }
    cfg["analyses"] = std::vector<std::string>(sc.analyses.begin(), sc.analyses.end());
    return sc;
}

inline json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what(), e.byte == 0 ? 0 : e.byte - 1);
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(parse_json_text(read_file(path)));
}

namespace detail {

inline json to_json(const BoundednessCertificate& c) {
    return {{"holds_small_chi", c.holds_small_chi},
            {"holds_any_chi_semigroup", c.holds_any_chi_semigroup},
            {"holds_any_chi_energy", c.holds_any_chi_energy},
            {"verdict", to_string(c.verdict)}};
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const Prediction& p) {
    return {{"outcome", to_string(p.outcome)},
            {"rate_claim", to_string(p.rate_claim)},
            {"applicable_result", p.applicable_result},
            {"presupposes_bounded_solution", p.presupposes_bounded_solution},
            {"threshold_side", to_string(p.threshold_side)},
            {"S_limit_cap", opt_json(p.S_limit_cap)},
            {"S_limit", opt_json(p.S_limit)},
            {"I_limit", opt_json(p.I_limit)}};
}

inline json to_json(const SpectralResult& s) {
    return {{"R0", s.R0},
            {"lambda_star", s.lambda_star},
            {"iterations", s.iterations},
            {"sign_consistent", s.sign_consistent()}};
}

// Spectral input is needed exactly when the p = 1 threshold branch applies.
inline bool needs_spectral(const Scenario& sc) {
    const ModelParams& m = sc.params;
    return m.p == 1.0 && m.mu == 0.0 && m.chi == 0.0 &&
           (homogeneous_ratio(sc.beta, sc.gamma) || m.d_S == m.d_I);
}

inline double N_over_omega(const Scenario& sc) {
    return ConservedTotals::of(sc.S0, sc.I0).mean_density();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write " + path.string());
    out << text;
}

inline std::string timeseries_csv(const Trajectory& traj) {
    std::string s = "t,mass_S,mass_I,linf_S,linf_I,clamp_mass,V1,V3,V4,l2_gradS,l2_gradI,cum_I_integral\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : traj.records) {
        s += format_double(r.t) + ',' + format_double(r.mass_S) + ',' + format_double(r.mass_I) + ',' +
             format_double(r.linf_S) + ',' + format_double(r.linf_I) + ',' +
             format_double(r.clamp_mass) + ',' + opt(r.V1) + ',' + opt(r.V3) + ',' + opt(r.V4) +
             ',' + format_double(r.l2_gradS) + ',' + format_double(r.l2_gradI) + ',' +
             format_double(r.cumulative_I_integral) + '\n';
    }
    return s;
}

inline std::string snapshot_csv(const Snapshot& snap) {
    const Grid& g = snap.S.grid();
    std::string s = g.dim() == 1 ? "x,S,I\n" : "x,y,S,I\n";
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto c = g.center(k);
        s += format_double(c[0]) + ',';
        if (g.dim() == 2) s += format_double(c[1]) + ',';
        s += format_double(snap.S[k]) + ',' + format_double(snap.I[k]) + '\n';
    }
    return s;
}

}  // namespace detail

/// Result of run_scenario: the summary document and the process exit code.
struct RunOutcome {
    json summary;
    int exit_code = 0;
};

/// Certificate, prediction and (when required) spectral data without time
/// stepping.
inline json check_scenario(const Scenario& sc) {
    json out;
    out["id"] = sc.id;
    out["certificate"] = detail::to_json(boundedness_certificate(sc.grid.dim(), sc.params.p, sc.params.q));
    std::optional<SpectralResult> spectral;
    if (detail::needs_spectral(sc))
        spectral = basic_reproduction_number(sc.beta, sc.gamma, sc.params.d_I,
                                             detail::N_over_omega(sc), sc.params.q);
    out["prediction"] = detail::to_json(
        predict_long_time(sc.params, sc.beta, sc.gamma, detail::N_over_omega(sc), spectral));
    out["spectral"] = spectral ? detail::to_json(*spectral) : json(nullptr);
    return out;
}

/// Runs the scenario and writes timeseries.csv, snapshot_NNN.csv and
/// summary.json into out_dir. Artifacts are written even when the run aborts.
inline RunOutcome run_scenario(const Scenario& sc, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const ModelParams& m = sc.params;
    const ConservedTotals totals = ConservedTotals::of(sc.S0, sc.I0);
    const double tau = totals.mean_density();
    json summary;
    summary["id"] = sc.id;
    json errors = json::object();
    auto wants = [&](const char* a) { return sc.analyses.count(a) > 0; };

    std::optional<BoundednessCertificate> cert;
    if (wants("certificate")) {
        cert = boundedness_certificate(sc.grid.dim(), m.p, m.q);
        summary["certificate"] = detail::to_json(*cert);
    }

    std::optional<SpectralResult> spectral;
    const bool need_spectral = wants("R0") || (detail::needs_spectral(sc) &&
                                           (wants("prediction") || wants("equilibria") || wants("lyapunov")));
    if (need_spectral) {
        try {
            spectral = basic_reproduction_number(sc.beta, sc.gamma, m.d_I, tau, m.q);
            summary["spectral"] = detail::to_json(*spectral);
        } catch (const Error& e) {
            errors["R0"] = e.what();
        }
    }

    std::optional<Prediction> prediction;
    if (wants("prediction") || wants("equilibria") || wants("lyapunov")) {
        try {
            prediction = predict_long_time(m, sc.beta, sc.gamma, tau, spectral);
            if (wants("prediction")) summary["prediction"] = detail::to_json(*prediction);
        } catch (const Error& e) {
            errors["prediction"] = e.what();
        }
    }

    // Predicted limit state, when it is known.
    std::optional<Equilibrium> target;
    if (wants("equilibria") && prediction) {
        try {
            if (prediction->S_limit && prediction->I_limit) {
                const EquilibriumKind kind = *prediction->I_limit > 0.0 ? EquilibriumKind::ConstantEE
                                                                        : EquilibriumKind::DFE;
                target = ConstantEquilibrium{kind, *prediction->S_limit, *prediction->I_limit, 0.0}.on(sc.grid);
            } else if (prediction->outcome == Outcome::HeterogeneousEE ||
                       (prediction->outcome == Outcome::ThresholdByR0 &&
                        prediction->threshold_side == ThresholdSide::EE)) {
                auto het = heterogeneous_ee(tau, sc.beta, sc.gamma, m.d_I, m.p, m.q, 1e-10);
                summary["heterogeneous_ee"] = {{"iterations", het.iterations},
                                               {"gap", het.gap},
                                               {"monotonicity_violation", het.monotonicity_violation},
                                               {"residual", het.equilibrium.residual}};
                target = std::move(het.equilibrium);
            }
        } catch (const Error& e) {
            errors["equilibria"] = e.what();
        }
    }

    Problem pb{m, sc.beta, sc.gamma, State{sc.S0, sc.I0, 0.0}, sc.stepper, RunOptions{}};
    pb.options.t_end = sc.t_end;
    pb.options.record_every = sc.record_every;
    pb.options.snapshot_times = sc.snapshot_times;
    pb.options.stop_on_convergence = sc.convergence_enabled;
    pb.options.convergence_window = sc.convergence_window;
    pb.options.convergence_tol = sc.convergence_tol;

    if (wants("lyapunov") && prediction) {
        const auto r = homogeneous_ratio(sc.beta, sc.gamma);
        if (prediction->outcome == Outcome::ConstantEE && m.p < 1.0) {
            const double Ss = *prediction->S_limit, Is = *prediction->I_limit;
            pb.options.lyapunov = [=](const State& s) { return lyapunov_V1(s.S, s.I, Ss, Is, m.p, m.q); };
            pb.options.lyapunov_name = "V1";
        } else if (prediction->outcome == Outcome::ThresholdByR0 && r) {
            if (prediction->threshold_side == ThresholdSide::DFE) {
                const double rr = *r;
                pb.options.lyapunov = [=](const State& s) { return lyapunov_V3(s.S, s.I, tau, rr, m.q); };
                pb.options.lyapunov_name = "V3";
            } else {
                const double Sh = *prediction->S_limit, Ih = *prediction->I_limit;
                pb.options.lyapunov = [=](const State& s) {
                    return lyapunov_V4(s.S, s.I, Sh, Ih, m.d_S, m.d_I);
                };
                pb.options.lyapunov_name = "V4";
            }
        }
        if (!pb.options.lyapunov) summary["lyapunov"] = "not applicable to this parameter regime";
    }

    const Trajectory traj = run(pb);
    const State& fin = *traj.final_state;

    summary["stop_reason"] = to_string(traj.stop_reason);
    if (traj.stop_reason == StopReason::Aborted) summary["abort_message"] = traj.abort_message;
    summary["steps"] = traj.steps;
    summary["t_final"] = fin.t;
    summary["N"] = totals.N;
    summary["omega_measure"] = totals.omega_measure;
    const Record last = make_record(fin, traj.cumulative_I_integral, traj.clamp_mass_total);
    summary["final"] = {{"mass_S", last.mass_S},     {"mass_I", last.mass_I},
                        {"linf_S", last.linf_S},     {"linf_I", last.linf_I},
                        {"l2_gradS", last.l2_gradS}, {"l2_gradI", last.l2_gradI},
                        {"mean_S", last.mass_S / totals.omega_measure}};
    const double residual = mass_balance_residual(traj, m.mu, totals.N);
    summary["mass_balance_residual"] = residual;
    summary["max_step_mass_defect"] = traj.max_step_mass_defect;
    summary["clamp_mass_total"] = traj.clamp_mass_total;
    summary["cumulative_I_integral"] = traj.cumulative_I_integral;

    if (target) {
        summary["equilibrium"] = {
            {"kind", to_string(target->kind)},
            {"distance", std::max(max_abs_diff(fin.S, target->S), max_abs_diff(fin.I, target->I))}};
    }
    if (wants("equilibria") && m.mu > 0.0) {
        summary["S_star"] = {{"predicted", predict_S_star(traj, m.mu, totals.N, totals.omega_measure)},
                             {"measured_mean", last.mass_S / totals.omega_measure}};
    }
    if (traj.lyapunov) {
        const auto& v = *traj.lyapunov;
        summary["lyapunov"] = {{"name", v.name},
                               {"initial", v.initial},
                               {"final", v.final},
                               {"max_increase", v.max_increase},
                               {"slack", v.slack},
                               {"monotone", v.monotone()}};
    }
    if (wants("rates")) {
        try {
            std::vector<std::pair<double, double>> sI, sTot;
            for (const auto& r : traj.records) {
                sI.emplace_back(r.t, r.linf_I);
                sTot.emplace_back(r.t, r.linf_S + r.linf_I);
            }
            summary["rates"] = {{"linf_I", decay_rate(sI)}, {"linf_S_plus_I", decay_rate(sTot)}};
        } catch (const Error& e) {
            errors["rates"] = e.what();
        }
    }
    summary["warnings"] = traj.warnings;
    summary["analysis_errors"] = errors;
    summary["config"] = sc.config;

    const bool ok = traj.stop_reason != StopReason::Aborted && errors.empty() && residual <= 1e-6;
    summary["success"] = ok;

    detail::write_text(out_dir / "timeseries.csv", detail::timeseries_csv(traj));
    json snaps = json::array();
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
        detail::write_text(out_dir / name, detail::snapshot_csv(traj.snapshots[i]));
        snaps.push_back({{"file", name}, {"t", traj.snapshots[i].t}});
    }
    summary["snapshots"] = snaps;
    detail::write_text(out_dir / "summary.json", summary.dump(2) + "\n");
    return {summary, ok ? 0 : 1};
}

/// One sweep axis: a dotted path into the scenario JSON (array elements by
/// index, e.g. "domain.cells.0") and the values it takes.
struct SweepAxis {
    std::string path;
    std::vector<double> values;
};

inline std::vector<SweepAxis> parse_axes(const json& j) {
    detail::check_keys(j, "", {"axes"});
    if (!j.contains("axes") || !j["axes"].is_array() || j["axes"].empty())
        detail::schema_error("axes", "expected a non-empty array");
    std::vector<SweepAxis> out;
    for (const auto& a : j["axes"]) {
        detail::check_keys(a, "axes[]", {"path", "values"});
        if (!a.contains("path") || !a["path"].is_string()) detail::schema_error("axes[].path", "expected a string");
        if (!a.contains("values") || !a["values"].is_array() || a["values"].empty())
            detail::schema_error("axes[].values", "expected a non-empty array of numbers");
        SweepAxis ax{a["path"].get<std::string>(), {}};
        for (const auto& v : a["values"]) {
            if (!v.is_number()) detail::schema_error("axes[].values", "expected numbers");
            ax.values.push_back(v.get<double>());
        }
        out.push_back(std::move(ax));
    }
    return out;
}

namespace detail {

// Sets a numeric scalar at a dotted path; the target must already exist in
// the template or be a key of an existing object.
inline void set_path(json& root, const std::string& path, double value) {
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        const bool last = dot == std::string::npos;
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(key);
            } catch (...) {
                schema_error(path, "array index expected at '" + key + "'");
            }
            if (idx >= node->size()) schema_error(path, "array index out of range");
            node = &(*node)[idx];
        } else if (node->is_object()) {
            if (!last && !node->contains(key)) (*node)[key] = json::object();
            node = &(*node)[key];
        } else {
            schema_error(path, "cannot descend into a scalar");
        }
        if (last) break;
        start = dot + 1;
    }
    if (!node->is_null() && !node->is_number()) schema_error(path, "sweep axes may only vary numeric scalars");
    const double r = std::round(value);
    if (node->is_number_integer() && r == value)
        *node = static_cast<long long>(r);
    else
        *node = value;
}

}  // namespace detail

struct SweepRow {
    std::size_t index;
    std::vector<double> coords;
    std::string id;
    std::string status;  // ok, failed, error
    json summary;        // null when the scenario could not be loaded
    std::string error;
};

/// Expands the axes (first axis slowest) and runs every combination with up
/// to `jobs` worker threads. Each row writes to out_dir/row_NNNN. The
/// returned rows and the table written to out_dir/sweep.csv do not depend
/// on `jobs`.
inline std::vector<SweepRow> sweep(const json& templ, const std::vector<SweepAxis>& axes,
                                   const std::filesystem::path& out_dir, int jobs = 1) {
    namespace fs = std::filesystem;
    if (axes.empty()) throw DomainError("sweep needs at least one axis");
    if (jobs < 1) throw DomainError("jobs must be >= 1");
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.values.size();
    const std::string base_id = templ.contains("id") && templ["id"].is_string()
                                    ? templ["id"].get<std::string>()
                                    : std::string("sweep");

    std::vector<SweepRow> rows(total);
    for (std::size_t i = 0; i < total; ++i) {
        rows[i].index = i;
        std::size_t rem = i;
        rows[i].coords.resize(axes.size());
        for (std::size_t a = axes.size(); a-- > 0;) {
            rows[i].coords[a] = axes[a].values[rem % axes[a].values.size()];
            rem /= axes[a].values.size();
        }
        std::string id = base_id;
        for (std::size_t a = 0; a < axes.size(); ++a)
            id += "__" + axes[a].path + "=" + format_double(rows[i].coords[a]);
        rows[i].id = id;
    }
    fs::create_directories(out_dir);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            SweepRow& row = rows[i];
            char dir[32];
            std::snprintf(dir, sizeof dir, "row_%04zu", i);
            try {
                json j = templ;
                for (std::size_t a = 0; a < axes.size(); ++a)
                    detail::set_path(j, axes[a].path, row.coords[a]);
                j["id"] = row.id;
                const Scenario sc = parse_scenario(j);
                RunOutcome res = run_scenario(sc, out_dir / dir);
                row.summary = std::move(res.summary);
                row.status = res.exit_code == 0 ? "ok" : "failed";
            } catch (const std::exception& e) {
                row.status = "error";
                row.error = e.what();
            }
        }
    };
    const int n_threads = static_cast<int>(std::min<std::size_t>(jobs, total));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // Table assembled after every row is done, in expansion order.
    auto scalar = [](const json& s, std::initializer_list<const char*> keys) -> std::string {
        const json* node = &s;
        for (const char* k : keys) {
            if (!node->is_object() || !node->contains(k)) return "";
            node = &(*node)[k];
        }
        if (node->is_number()) return format_double(node->get<double>());
        if (node->is_boolean()) return node->get<bool>() ? "true" : "false";
        if (node->is_string()) return node->get<std::string>();
        return "";
    };
    auto csv_quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    std::string table = "row,id";
    for (const auto& a : axes) table += "," + csv_quote(a.path);
    table +=
        ",status,stop_reason,steps,mass_balance_residual,verdict,outcome,R0,lambda_star,"
        "equilibrium_distance,final_linf_S,final_linf_I,lyapunov_monotone,error\n";
    for (const auto& row : rows) {
        table += std::to_string(row.index) + "," + csv_quote(row.id);
        for (double c : row.coords) table += "," + format_double(c);
        const json& s = row.summary;
        table += "," + row.status + "," + scalar(s, {"stop_reason"}) + "," + scalar(s, {"steps"}) + "," +
                 scalar(s, {"mass_balance_residual"}) + "," + scalar(s, {"certificate", "verdict"}) + "," +
                 scalar(s, {"prediction", "outcome"}) + "," + scalar(s, {"spectral", "R0"}) + "," +
                 scalar(s, {"spectral", "lambda_star"}) + "," + scalar(s, {"equilibrium", "distance"}) +
                 "," + scalar(s, {"final", "linf_S"}) + "," + scalar(s, {"final", "linf_I"}) + "," +
                 scalar(s, {"lyapunov", "monotone"}) + "," + csv_quote(row.error) + "\n";
    }
    detail::write_text(out_dir / "sweep.csv", table);
    return rows;
}

}  // namespace sislab
