#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "sislab/equilibria.hpp"
#include "sislab/model.hpp"

namespace sislab {

enum class BoundednessVerdict { AnyChi, SmallChiOnly, Unproven };

inline const char* to_string(BoundednessVerdict v) noexcept {
    switch (v) {
        case BoundednessVerdict::AnyChi: return "AnyChi";
        case BoundednessVerdict::SmallChiOnly: return "SmallChiOnly";
        case BoundednessVerdict::Unproven: return "Unproven";
    }
    return "?";
}

struct BoundednessCertificate {
    bool holds_small_chi = false;
    bool holds_any_chi_semigroup = false;
    bool holds_any_chi_energy = false;
    BoundednessVerdict verdict = BoundednessVerdict::Unproven;
};

/// Known sufficient conditions for global boundedness, as functions of the
/// space dimension n and the exponents. The small-chi region comes with a
/// chi threshold that is not computable, so it is reported as a flag only.
inline BoundednessCertificate boundedness_certificate(int n, double p, double q) {
    if (n < 1) throw DomainError("dimension must be >= 1");
    if (!(p > 0.0) || !(q > 0.0)) throw DomainError("p and q must be > 0");
    const double nd = n;
    BoundednessCertificate c;
    c.holds_small_chi = nd * p + std::max(nd - 2.0, 0.0) * q < nd + std::min(nd, 2.0);
    c.holds_any_chi_semigroup =
        q < 1.0 / (nd + 1.0) && p + (nd + 1.0) * q < 1.0 + std::min(1.0, 2.0 / nd);
    if (n == 1)
        c.holds_any_chi_energy = 10.0 * q + 4.0 * p < 15.0 && q + p < 3.0;
    else if (n == 2)
        c.holds_any_chi_energy = 3.0 * q + p < 3.0 && q + p < 2.0;
    if (c.holds_any_chi_semigroup || c.holds_any_chi_energy)
        c.verdict = BoundednessVerdict::AnyChi;
    else if (c.holds_small_chi)
        c.verdict = BoundednessVerdict::SmallChiOnly;
    return c;
}

enum class Outcome { ExtinctionBoth, DiseaseFree, ConstantEE, HeterogeneousEE, ThresholdByR0, Unknown };
enum class RateClaim { None, Exponential };
enum class ThresholdSide { NotApplicable, DFE, EE };

inline const char* to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::ExtinctionBoth: return "ExtinctionBoth";
        case Outcome::DiseaseFree: return "DiseaseFree";
        case Outcome::ConstantEE: return "ConstantEE";
        case Outcome::HeterogeneousEE: return "HeterogeneousEE";
        case Outcome::ThresholdByR0: return "ThresholdByR0";
        case Outcome::Unknown: return "Unknown";
    }
    return "?";
}
inline const char* to_string(RateClaim r) noexcept {
    return r == RateClaim::Exponential ? "exponential" : "none";
}
inline const char* to_string(ThresholdSide s) noexcept {
    switch (s) {
        case ThresholdSide::NotApplicable: return "n/a";
        case ThresholdSide::DFE: return "DFE";
        case ThresholdSide::EE: return "EE";
    }
    return "?";
}

struct Prediction {
    Outcome outcome = Outcome::Unknown;
    RateClaim rate_claim = RateClaim::None;
    std::string applicable_result;  // short label of the result whose hypotheses hold
    bool presupposes_bounded_solution = false;
    ThresholdSide threshold_side = ThresholdSide::NotApplicable;
    std::optional<double> S_limit_cap;  // upper bound on the S limit (mu > 0, p = 1, homogeneous)
    std::optional<double> S_limit;      // constant S limit when known a priori
    std::optional<double> I_limit;      // constant I limit when known a priori
};

/// gamma / beta when the ratio is constant to 1e-12 relative.
inline std::optional<double> homogeneous_ratio(const Field& beta, const Field& gamma) {
    require_same_grid(beta, gamma);
    const double r0 = gamma[0] / beta[0];
    for (std::size_t k = 1; k < beta.size(); ++k)
        if (std::abs(gamma[k] / beta[k] - r0) > 1e-12 * r0) return std::nullopt;
    return r0;
}

/// Long-time outcome implied by the known results for the given parameters.
/// Only the p = 1, mu = 0, chi = 0 threshold branch needs spectral input.
inline Prediction predict_long_time(const ModelParams& m, const Field& beta, const Field& gamma,
                                    double N_over_omega,
                                    const std::optional<SpectralResult>& spectral = std::nullopt) {
    m.validate();
    const auto r = homogeneous_ratio(beta, gamma);
    Prediction out;

    if (m.mu > 0.0) {
        out.presupposes_bounded_solution = true;
        if (m.p < 1.0) {
            out.outcome = Outcome::ExtinctionBoth;
            out.applicable_result = "mu>0, p<1: S and I both vanish";
            out.S_limit = 0.0;
            out.I_limit = 0.0;
        } else {
            out.outcome = Outcome::DiseaseFree;
            out.I_limit = 0.0;
            if (m.p > 1.0) {
                out.rate_claim = RateClaim::Exponential;
                out.applicable_result = "mu>0, p>1: I vanishes exponentially, S tends to S_inf";
            } else {
                out.applicable_result = "mu>0, p=1: I vanishes, S tends to S_inf";
                if (r) {
                    double cap = 0.0;
                    for (std::size_t k = 0; k < beta.size(); ++k)
                        cap = std::max(cap, std::pow((gamma[k] + m.mu) / beta[k], 1.0 / m.q));
                    out.S_limit_cap = cap;
                }
            }
        }
        return out;
    }

    if (m.chi != 0.0) return out;
    const bool equal_diffusion = m.d_S == m.d_I;
    if (!r && !equal_diffusion) return out;

    if (m.p < 1.0) {
        if (r) {
            const auto ee = constant_ee_sublinear(N_over_omega, *r, m.p, m.q);
            out.outcome = Outcome::ConstantEE;
            out.applicable_result = "mu=0, chi=0, p<1, gamma=r*beta: constant EE";
            out.S_limit = ee.S;
            out.I_limit = ee.I;
        } else {
            out.outcome = Outcome::HeterogeneousEE;
            out.applicable_result = "mu=0, chi=0, p<1, d_S=d_I: heterogeneous EE";
        }
        return out;
    }
    if (m.p == 1.0) {
        if (!spectral)
            throw MissingInputError("the p=1 threshold prediction needs R0 (spectral input)");
        out.outcome = Outcome::ThresholdByR0;
        if (r) {
            out.applicable_result = "mu=0, chi=0, p=1, gamma=r*beta: threshold by R0";
            const auto ee = constant_ee_linear(N_over_omega, *r, m.q);
            if (ee) {
                out.threshold_side = ThresholdSide::EE;
                out.S_limit = ee->S;
                out.I_limit = ee->I;
            } else {
                out.threshold_side = ThresholdSide::DFE;
                out.S_limit = N_over_omega;
                out.I_limit = 0.0;
            }
        } else {
            out.applicable_result = "mu=0, chi=0, p=1, d_S=d_I: threshold by R0";
            if (spectral->R0 > 1.0) {
                out.threshold_side = ThresholdSide::EE;
            } else {
                out.threshold_side = ThresholdSide::DFE;
                out.S_limit = N_over_omega;
                out.I_limit = 0.0;
            }
        }
        return out;
    }
    return out;  // p > 1 without mass loss depends on the initial data
}

}  // namespace sislab
