#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sislab/model.hpp"

using namespace sislab;

TEST(Incidence, Examples) {
    EXPECT_DOUBLE_EQ(incidence(1.0, 1.0, 2.0, 0.7, 1.3), 2.0);
    EXPECT_DOUBLE_EQ(incidence(4.0, 0.25, 1.0, 0.5, 0.5), 1.0);
    EXPECT_EQ(incidence(0.0, 3.0, 5.0, 1.0, 2.0), 0.0);
    EXPECT_EQ(incidence(2.0, 0.0, 5.0, 1.0, 1.0), 0.0);
}

TEST(Incidence, FloorBreachesAreInternalErrors) {
    EXPECT_THROW(incidence(0.0, 1.0, 1.0, 1.0, 0.5), InternalError);
    EXPECT_THROW(incidence(1.0, 0.0, 1.0, 0.5, 1.0), InternalError);
    EXPECT_THROW(incidence(-1e-3, 1.0, 1.0, 1.0, 1.0), InternalError);
}

TEST(Incidence, PowerLawHomogeneityAndMonotonicity) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(0.01, 5.0), expo(0.1, 3.0), fac(1.01, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double S = pos(rng), I = pos(rng), b = pos(rng), p = expo(rng), q = expo(rng), c = fac(rng);
        const double base = incidence(S, I, b, p, q);
        EXPECT_NEAR(incidence(c * S, I, b, p, q), std::pow(c, q) * base, 1e-12 * std::pow(c, q) * base);
        EXPECT_GE(incidence(c * S, I, b, p, q), base);
        EXPECT_GE(incidence(S, c * I, b, p, q), base);
        EXPECT_GE(incidence(S, I, c * b, p, q), base);
    }
}

TEST(ModelParams, ViolationsListEachClause) {
    ModelParams m;
    EXPECT_TRUE(m.violations().empty());
    m.d_S = -1.0;
    m.mu = -0.1;
    m.q = 0.0;
    const auto v = m.violations();
    ASSERT_EQ(v.size(), 3u);
    EXPECT_THROW(m.validate(), AdmissibilityError);
}

TEST(Coefficient, ConstantEverywhere) {
    const Grid g = Grid::rect(1.0, 1.0, 3, 4);
    const Field f = materialize_coefficient(CoefficientField::constant(0.8), g);
    for (double v : f.values()) EXPECT_EQ(v, 0.8);
}

TEST(Coefficient, ExpressionAtCellCentres) {
    const double pi = std::numbers::pi;
    const Grid g = Grid::line(pi, 4);
    const Field f = materialize_coefficient(CoefficientField::expression("2 + sin(x)"), g);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(f[k], 2.0 + std::sin((k + 0.5) * pi / 4));
}

TEST(Coefficient, NonPositiveValuesAreRejectedWithCellIndex) {
    const Grid g = Grid::line(1.0, 5);
    try {
        materialize_coefficient(CoefficientField::expression("x - 10"), g);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("non-positive coefficient at cell 0"), std::string::npos);
    }
    EXPECT_THROW(materialize_coefficient(CoefficientField::tabulated({1, 2, 0, 1, 1}), g), DomainError);
    EXPECT_THROW(materialize_coefficient(CoefficientField::expression("1/(x-x)"), g), DomainError);
}

TEST(Expression, GrammarAndErrors) {
    const auto e = Expression::parse("-(1 + 2*x) / 4 + exp(0)*cos(pi*y) - +3");
    EXPECT_DOUBLE_EQ(e(1.0, 0.0), -0.75 + 1.0 - 3.0);
    EXPECT_DOUBLE_EQ(e(1.0, 1.0), -0.75 - 1.0 - 3.0);
    try {
        Expression::parse("1 + * 2");
        FAIL() << "expected ParseError";
    } catch (const ParseError& err) {
        EXPECT_EQ(err.position(), 4u);
    }
    EXPECT_THROW(Expression::parse("sin(x"), ParseError);
    EXPECT_THROW(Expression::parse("log(x)"), ParseError);
    EXPECT_THROW(Expression::parse("2 x"), ParseError);
}

TEST(InitialData, ClauseExamples) {
    const Grid g = Grid::line(1.0, 4);
    const Field S0(g, std::vector<double>{0.0, 1.0, 1.0, 1.0});
    const Field I0(g, 1.0);
    const auto v = validate_initial_data(S0, I0, 1.0, 0.5);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0], "inf S0 must be >0 when q<1");
    EXPECT_TRUE(validate_initial_data(S0, I0, 1.0, 1.5).empty());

    const auto w = validate_initial_data(Field(g, 2.0), Field(g, 0.0), 1.0, 1.0);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0], "I0 must not vanish identically");
    EXPECT_THROW(InitialData(Field(g, 2.0), Field(g, 0.0), 1.0, 1.0), AdmissibilityError);
}

TEST(InitialData, MismatchedGridsAreStructural) {
    EXPECT_THROW(validate_initial_data(Field(Grid::line(1.0, 4), 1.0), Field(Grid::line(1.0, 5), 1.0), 1, 1),
                 StructuralError);
}

// Each clause checked independently against a direct transcription.
TEST(InitialData, ClauseByClauseProperty) {
    const Grid g = Grid::line(1.0, 6);
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_real_distribution<double> expo(0.2, 2.0);
    const double choices[] = {-0.5, 0.0, 0.3, 2.0};
    for (int trial = 0; trial < 400; ++trial) {
        Field S(g, 0.0), I(g, 0.0);
        for (std::size_t k = 0; k < g.size(); ++k) {
            S[k] = choices[pick(rng)];
            I[k] = choices[pick(rng)];
        }
        const double p = expo(rng), q = expo(rng);
        std::vector<std::string> expected;
        if (S.min() < 0) expected.push_back("S0 must be >= 0");
        if (I.min() < 0) expected.push_back("I0 must be >= 0");
        if (I.max() <= 0) expected.push_back("I0 must not vanish identically");
        if (q < 1 && S.min() <= 0) expected.push_back("inf S0 must be >0 when q<1");
        if (p < 1 && I.min() <= 0) expected.push_back("inf I0 must be >0 when p<1");
        EXPECT_EQ(validate_initial_data(S, I, p, q), expected);
    }
}

TEST(ConservedTotals, PopulationAndMeasure) {
    const Grid g = Grid::line(2.0, 8);
    const auto t = ConservedTotals::of(Field(g, 1.5), Field(g, 0.5));
    EXPECT_DOUBLE_EQ(t.N, 4.0);
    EXPECT_DOUBLE_EQ(t.omega_measure, 2.0);
    EXPECT_DOUBLE_EQ(t.mean_density(), 2.0);
}
