#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "sislab/error.hpp"
#include "sislab/expression.hpp"
#include "sislab/grid.hpp"
#include "sislab/operators.hpp"

namespace sislab {

/// Coefficients of the cross-diffusive SIS system
///   S_t = d_S lap S + chi div(S grad I) - beta S^q I^p + gamma I
///   I_t = d_I lap I + beta S^q I^p - (gamma + mu) I
/// with beta(x), gamma(x) supplied separately as fields.
struct ModelParams {
    double d_S = 1.0;
    double d_I = 1.0;
    double chi = 0.0;  // signed; boundedness results only depend on |chi|
    double mu = 0.0;
    double p = 1.0;
    double q = 1.0;

    /// Empty when every invariant holds.
    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (!(d_S > 0.0) || !std::isfinite(d_S)) out.push_back("d_S must be > 0");
        if (!(d_I > 0.0) || !std::isfinite(d_I)) out.push_back("d_I must be > 0");
        if (!std::isfinite(chi)) out.push_back("chi must be finite");
        if (!(mu >= 0.0) || !std::isfinite(mu)) out.push_back("mu must be >= 0");
        if (!(p > 0.0) || !std::isfinite(p)) out.push_back("p must be > 0");
        if (!(q > 0.0) || !std::isfinite(q)) out.push_back("q must be > 0");
        return out;
    }

    void validate() const {
        if (auto v = violations(); !v.empty()) throw AdmissibilityError(std::move(v));
    }

    /// Exponents below one need strictly positive S and I.
    bool needs_positive_floor() const noexcept { return p < 1.0 || q < 1.0; }
};

/// x^e for x >= 0, e > 0, with 0^e defined as 0.
inline double pos_pow(double x, double e) noexcept {
    if (x <= 0.0) return 0.0;
    if (e == 1.0) return x;
    return std::pow(x, e);
}

/// Power-law incidence beta * S^q * I^p.
inline double incidence(double S, double I, double beta, double p, double q) {
    if (S < 0.0 || I < 0.0) throw InternalError("incidence evaluated at a negative density");
    if ((S == 0.0 && q < 1.0) || (I == 0.0 && p < 1.0))
        throw InternalError("incidence evaluated at zero with a sublinear exponent (floor breach)");
    return beta * pos_pow(S, q) * pos_pow(I, p);
}

/// beta(x) or gamma(x): a constant, per-cell table, or expression in x, y.
class CoefficientField {
public:
    static CoefficientField constant(double v) { return CoefficientField(v); }
    static CoefficientField tabulated(std::vector<double> v) { return CoefficientField(std::move(v)); }
    static CoefficientField expression(std::string_view text) {
        return CoefficientField(Expression::parse(text));
    }

    bool is_constant() const noexcept { return std::holds_alternative<double>(source_); }
    double constant_value() const { return std::get<double>(source_); }

    /// Per-cell values without any sign requirement.
    Field evaluate(const Grid& grid) const {
        if (const auto* c = std::get_if<double>(&source_)) return Field(grid, *c);
        if (const auto* t = std::get_if<std::vector<double>>(&source_)) return Field(grid, *t);
        const auto& e = std::get<Expression>(source_);
        Field out(grid, 0.0);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto c = grid.center(k);
            out[k] = e(c[0], c[1]);
        }
        return out;
    }

private:
    explicit CoefficientField(double v) : source_(v) {}
    explicit CoefficientField(std::vector<double> v) : source_(std::move(v)) {}
    explicit CoefficientField(Expression e) : source_(std::move(e)) {}

    std::variant<double, std::vector<double>, Expression> source_;
};

/// Evaluates a coefficient on a grid and rejects any value that is not
/// strictly positive and finite.
inline Field materialize_coefficient(const CoefficientField& coef, const Grid& grid) {
    Field f = coef.evaluate(grid);
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (!std::isfinite(f[k]))
            throw DomainError("non-finite coefficient at cell " + std::to_string(k));
        if (f[k] <= 0.0)
            throw DomainError("non-positive coefficient at cell " + std::to_string(k) + " (value " +
                              std::to_string(f[k]) + ")");
    }
    return f;
}

/// Lists the admissibility clauses violated by (S0, I0). An empty result
/// means the data is admissible.
inline std::vector<std::string> validate_initial_data(const Field& S0, const Field& I0, double p,
                                                      double q) {
    require_same_grid(S0, I0);
    std::vector<std::string> out;
    if (!S0.all_finite()) out.push_back("S0 must be finite");
    if (!I0.all_finite()) out.push_back("I0 must be finite");
    if (!out.empty()) return out;
    if (S0.min() < 0.0) out.push_back("S0 must be >= 0");
    if (I0.min() < 0.0) out.push_back("I0 must be >= 0");
    if (!(I0.max() > 0.0)) out.push_back("I0 must not vanish identically");
    if (q < 1.0 && !(S0.min() > 0.0)) out.push_back("inf S0 must be >0 when q<1");
    if (p < 1.0 && !(I0.min() > 0.0)) out.push_back("inf I0 must be >0 when p<1");
    return out;
}

/// Admissible initial data; construction validates.
struct InitialData {
    Field S0;
    Field I0;

    InitialData(Field s0, Field i0, double p, double q) : S0(std::move(s0)), I0(std::move(i0)) {
        if (auto v = validate_initial_data(S0, I0, p, q); !v.empty())
            throw AdmissibilityError(std::move(v));
    }
};

/// Total population and domain measure.
struct ConservedTotals {
    double N;
    double omega_measure;

    static ConservedTotals of(const Field& S0, const Field& I0) {
        require_same_grid(S0, I0);
        return {integrate(S0) + integrate(I0), S0.grid().omega_measure()};
    }
    double mean_density() const noexcept { return N / omega_measure; }
};

}  // namespace sislab
