#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sislab/classifier.hpp"

using namespace sislab;

namespace {

// Region inequalities transcribed independently of the library.
bool small_chi(int n, double p, double q) {
    const double pos = n > 2 ? n - 2 : 0;
    const double m = n < 2 ? n : 2;
    return n * p + pos * q < n + m;
}
bool semigroup(int n, double p, double q) {
    const double m = 2.0 / n < 1.0 ? 2.0 / n : 1.0;
    return q < 1.0 / (n + 1) && p + (n + 1) * q < 1.0 + m;
}
bool energy(int n, double p, double q) {
    if (n == 1) return 10 * q + 4 * p < 15 && q + p < 3;
    if (n == 2) return 3 * q + p < 3 && q + p < 2;
    return false;
}

SpectralResult fake_spectral(const Grid& g, double R0) {
    return SpectralResult{R0, R0 > 1 ? -0.5 : 0.5, Field(g, 1.0), 1};
}

}  // namespace

TEST(Certificate, OneDimensionalLinearIncidenceAnyChi) {
    const auto c = boundedness_certificate(1, 1.0, 1.0);
    EXPECT_TRUE(c.holds_any_chi_energy);
    EXPECT_EQ(c.verdict, BoundednessVerdict::AnyChi);
}

TEST(Certificate, TwoDimensionalLinearIncidenceSmallChiOnly) {
    const auto c = boundedness_certificate(2, 1.0, 1.0);
    EXPECT_FALSE(c.holds_any_chi_energy);
    EXPECT_FALSE(c.holds_any_chi_semigroup);
    EXPECT_TRUE(c.holds_small_chi);
    EXPECT_EQ(c.verdict, BoundednessVerdict::SmallChiOnly);
}

TEST(Certificate, ThreeDimensionalSemigroupRegion) {
    const auto c = boundedness_certificate(3, 0.2, 0.2);
    EXPECT_TRUE(c.holds_any_chi_semigroup);
    EXPECT_FALSE(c.holds_any_chi_energy);
    EXPECT_EQ(c.verdict, BoundednessVerdict::AnyChi);
}

TEST(Certificate, UnprovenOutsideAllRegions) {
    EXPECT_EQ(boundedness_certificate(1, 3.0, 1.0).verdict, BoundednessVerdict::Unproven);
}

TEST(Certificate, RandomTriplesAgreeWithTranscribedInequalities) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> nd(1, 4);
    std::uniform_real_distribution<double> u(0.01, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = nd(rng);
        const double p = u(rng), q = trial % 3 == 0 ? u(rng) / 10 : u(rng);
        const auto c = boundedness_certificate(n, p, q);
        EXPECT_EQ(c.holds_small_chi, small_chi(n, p, q)) << n << " " << p << " " << q;
        EXPECT_EQ(c.holds_any_chi_semigroup, semigroup(n, p, q)) << n << " " << p << " " << q;
        EXPECT_EQ(c.holds_any_chi_energy, energy(n, p, q)) << n << " " << p << " " << q;
        const auto expected = semigroup(n, p, q) || energy(n, p, q) ? BoundednessVerdict::AnyChi
                              : small_chi(n, p, q)                  ? BoundednessVerdict::SmallChiOnly
                                                                    : BoundednessVerdict::Unproven;
        EXPECT_EQ(c.verdict, expected);
    }
}

TEST(Certificate, DecreasingExponentsNeverLosesARegion) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.01, 3.0), f(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + trial % 4;
        const double p = u(rng), q = u(rng);
        const auto a = boundedness_certificate(n, p, q);
        const auto b = boundedness_certificate(n, p * f(rng) + 1e-6, q * f(rng) + 1e-6);
        EXPECT_TRUE(!a.holds_small_chi || b.holds_small_chi);
        EXPECT_TRUE(!a.holds_any_chi_semigroup || b.holds_any_chi_semigroup);
        EXPECT_TRUE(!a.holds_any_chi_energy || b.holds_any_chi_energy);
    }
}

TEST(Prediction, MassLossSublinearIsExtinction) {
    const Grid g = Grid::line(1.0, 8);
    ModelParams m;
    m.mu = 1.0;
    m.p = 0.5;
    m.q = 2.0;
    for (double chi : {0.0, 3.0, -1.0}) {
        m.chi = chi;
        const auto pr = predict_long_time(m, Field(g, 1.0), Field(g, 1.0), 2.0);
        EXPECT_EQ(pr.outcome, Outcome::ExtinctionBoth);
        EXPECT_TRUE(pr.presupposes_bounded_solution);
    }
}

TEST(Prediction, ThresholdAboveOneGivesConstantEE) {
    const Grid g = Grid::line(1.0, 8);
    ModelParams m;  // mu = 0, chi = 0, p = q = 1
    const double r = 0.5, tau = 2.0;
    const auto pr = predict_long_time(m, Field(g, 2.0), Field(g, 2.0 * r), tau, fake_spectral(g, tau / r));
    EXPECT_EQ(pr.outcome, Outcome::ThresholdByR0);
    EXPECT_EQ(pr.threshold_side, ThresholdSide::EE);
    EXPECT_DOUBLE_EQ(*pr.S_limit, r);
    EXPECT_DOUBLE_EQ(*pr.I_limit, tau - r);
    EXPECT_THROW(predict_long_time(m, Field(g, 2.0), Field(g, 1.0), tau), MissingInputError);
}

TEST(Prediction, SuperlinearWithoutDeathIsUnknown) {
    const Grid g = Grid::line(1.0, 8);
    ModelParams m;
    m.p = 1.5;
    EXPECT_EQ(predict_long_time(m, Field(g, 1.0), Field(g, 1.0), 2.0).outcome, Outcome::Unknown);
}

TEST(Prediction, MassLossSuperlinearIsExponentialDiseaseFree) {
    const Grid g = Grid::line(1.0, 8);
    ModelParams m;
    m.mu = 0.3;
    m.p = 2.0;
    m.q = 1.0;
    const auto pr = predict_long_time(m, Field(g, 1.0), Field(g, 1.0), 2.0);
    EXPECT_EQ(pr.outcome, Outcome::DiseaseFree);
    EXPECT_EQ(pr.rate_claim, RateClaim::Exponential);
}

TEST(Prediction, LinearMassLossCarriesCapWhenHomogeneous) {
    const Grid g = Grid::line(1.0, 8);
    ModelParams m;
    m.mu = 0.5;
    m.q = 2.0;
    const auto pr = predict_long_time(m, Field(g, 2.0), Field(g, 1.5), 3.0);
    EXPECT_EQ(pr.outcome, Outcome::DiseaseFree);
    EXPECT_EQ(pr.rate_claim, RateClaim::None);
    ASSERT_TRUE(pr.S_limit_cap);
    EXPECT_DOUBLE_EQ(*pr.S_limit_cap, 1.0);
}

TEST(Prediction, SublinearBranches) {
    const Grid g = Grid::line(1.0, 8);
    Field beta(g, 1.0), gamma(g, 1.0);
    gamma[3] = 1.5;
    ModelParams m;
    m.p = 0.5;
    EXPECT_EQ(predict_long_time(m, beta, Field(g, 1.0), 2.0).outcome, Outcome::ConstantEE);
    EXPECT_EQ(predict_long_time(m, beta, gamma, 2.0).outcome, Outcome::HeterogeneousEE);
    m.d_S = 2.0;
    EXPECT_EQ(predict_long_time(m, beta, gamma, 2.0).outcome, Outcome::Unknown);
    m.d_S = 1.0;
    m.chi = 0.1;
    EXPECT_EQ(predict_long_time(m, beta, Field(g, 1.0), 2.0).outcome, Outcome::Unknown);
}

// For gamma = r beta the algebraic test agrees with R0 > 1.
TEST(Prediction, AlgebraicThresholdAgreesWithR0) {
    const Grid g = Grid::line(1.0, 16);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double r = u(rng), tau = u(rng), q = u(rng), b = u(rng);
        ModelParams m;
        m.q = q;
        const auto sr = basic_reproduction_number(Field(g, b), Field(g, r * b), 1.0, tau, q);
        const auto pr = predict_long_time(m, Field(g, b), Field(g, r * b), tau, sr);
        EXPECT_EQ(pr.threshold_side == ThresholdSide::EE, sr.R0 > 1.0);
    }
}
