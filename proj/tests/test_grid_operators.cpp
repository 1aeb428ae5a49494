#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sislab/operators.hpp"

using namespace sislab;

namespace {

Field random_field(const Grid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Field f(g, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) f[k] = u(rng);
    return f;
}

template <class Fn>
Field sample(const Grid& g, Fn fn) {
    Field f(g, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto c = g.center(k);
        f[k] = fn(c[0], c[1]);
    }
    return f;
}

}  // namespace

TEST(Grid, GeometryOfLineAndRectangle) {
    const Grid line = Grid::line(2.0, 8);
    EXPECT_EQ(line.dim(), 1);
    EXPECT_EQ(line.size(), 8u);
    EXPECT_DOUBLE_EQ(line.h(0), 0.25);
    EXPECT_NEAR(line.omega_measure(), line.size() * line.cell_measure(), 1e-14 * 2.0);
    EXPECT_DOUBLE_EQ(line.center(0)[0], 0.125);

    const Grid rect = Grid::rect(1.0, 3.0, 4, 6);
    EXPECT_EQ(rect.size(), 24u);
    EXPECT_DOUBLE_EQ(rect.cell_measure(), 0.25 * 0.5);
    EXPECT_NEAR(rect.omega_measure(), rect.size() * rect.cell_measure(), 1e-14 * 3.0);
    EXPECT_EQ(rect.index(1, 2), 9u);
    const auto c = rect.center(rect.index(3, 5));
    EXPECT_DOUBLE_EQ(c[0], 0.875);
    EXPECT_DOUBLE_EQ(c[1], 2.75);
}

TEST(Grid, RejectsBadExtentsAndCounts) {
    EXPECT_THROW(Grid::line(0.0, 8), DomainError);
    EXPECT_THROW(Grid::line(-1.0, 8), DomainError);
    EXPECT_THROW(Grid::line(1.0, 1), DomainError);
    EXPECT_THROW(Grid::rect(1.0, 1.0, 4, 0), DomainError);
}

TEST(Field, LengthMustMatchGrid) {
    const Grid g = Grid::line(1.0, 4);
    EXPECT_THROW(Field(g, std::vector<double>(3, 1.0)), StructuralError);
    EXPECT_THROW(max_abs_diff(Field(g, 1.0), Field(Grid::line(1.0, 5), 1.0)), StructuralError);
}

TEST(Laplacian, ConstantIsHarmonic) {
    for (const Grid& g : {Grid::line(3.0, 17), Grid::rect(1.0, 2.0, 9, 5)}) {
        const Field lap = laplacian(Field(g, 7.0));
        for (double v : lap.values()) EXPECT_LE(std::abs(v), 1e-13);
    }
}

TEST(Laplacian, ExactOnQuadraticsAtInteriorCells) {
    const Grid g = Grid::line(1.0, 20);
    const Field f = sample(g, [](double x, double) { return x * x; });
    const Field lap = laplacian(f);
    for (std::size_t k = 1; k + 1 < g.size(); ++k) EXPECT_NEAR(lap[k], 2.0, 1e-9);
}

TEST(Laplacian, CosineIsADiscreteEigenfunction) {
    const double L = 1.0;
    const int n = 64;
    const Grid g = Grid::line(L, n);
    const double h = g.h(0);
    const double pi = std::numbers::pi;
    const Field f = sample(g, [&](double x, double) { return std::cos(pi * x / L); });

    // Oracle: the stencil as a dense matrix applied by hand.
    std::vector<double> dense(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        if (i > 0) s += f[i - 1] - f[i];
        if (i + 1 < n) s += f[i + 1] - f[i];
        dense[i] = s / (h * h);
    }
    const double lambda_h = 2.0 / (h * h) * (1.0 - std::cos(pi * h / L));
    const Field lap = laplacian(f);
    for (int i = 0; i < n; ++i) {
        EXPECT_NEAR(lap[i], dense[i], 1e-9);
        EXPECT_NEAR(lap[i], -lambda_h * f[i], 1e-9);
    }
}

TEST(Laplacian, ManufacturedSolutionIsSecondOrder) {
    const double pi = std::numbers::pi;
    const double L = 2.0;
    std::vector<double> errs;
    for (int n : {32, 64, 128}) {
        const Grid g = Grid::line(L, n);
        const Field f = sample(g, [&](double x, double) { return std::cos(pi * x / L); });
        const Field lap = laplacian(f);
        double e = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
            e = std::max(e, std::abs(lap[k] + (pi / L) * (pi / L) * f[k]));
        errs.push_back(e);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double order = std::log2(errs[i - 1] / errs[i]);
        EXPECT_NEAR(order, 2.0, 0.2);
    }
}

TEST(Laplacian, ManufacturedSolutionIsSecondOrderIn2D) {
    const double pi = std::numbers::pi;
    std::vector<double> errs;
    for (int n : {16, 32, 64}) {
        const Grid g = Grid::rect(1.0, 1.0, n, n);
        const Field f = sample(g, [&](double x, double y) { return std::cos(pi * x) * std::cos(2 * pi * y); });
        const Field lap = laplacian(f);
        double e = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) e = std::max(e, std::abs(lap[k] + 5 * pi * pi * f[k]));
        errs.push_back(e);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) EXPECT_NEAR(std::log2(errs[i - 1] / errs[i]), 2.0, 0.2);
}

TEST(Laplacian, DiscreteIntegrationByParts) {
    std::mt19937_64 rng(11);
    for (const Grid& g : {Grid::line(1.5, 40), Grid::rect(1.0, 2.0, 12, 7)}) {
        const Field f = random_field(g, rng), gg = random_field(g, rng);
        const double a = inner(gg, laplacian(f));
        const double b = inner(f, laplacian(gg));
        EXPECT_NEAR(a, b, 1e-11 * std::max(std::abs(a), 1.0));
    }
}

TEST(CrossDiffusion, VanishesForConstantI) {
    const Grid g = Grid::rect(1.0, 1.0, 6, 6);
    std::mt19937_64 rng(3);
    const Field S = random_field(g, rng, 0.1, 2.0);
    const Field div = cross_diffusion_div(S, Field(g, 4.0));
    for (double v : div.values()) EXPECT_EQ(v, 0.0);
}

TEST(CrossDiffusion, ConstantSGivesScaledLaplacian) {
    const Grid g = Grid::line(1.0, 30);
    std::mt19937_64 rng(5);
    const Field I = random_field(g, rng);
    const Field div = cross_diffusion_div(Field(g, 2.5), I);
    const Field lap = laplacian(I);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(div[k], 2.5 * lap[k], 1e-12 * std::abs(lap[k]) + 1e-12);
}

TEST(CrossDiffusion, IntegratesToZero) {
    std::mt19937_64 rng(7);
    for (const Grid& g : {Grid::line(1.0, 50), Grid::rect(2.0, 1.0, 10, 13)}) {
        const Field S = random_field(g, rng, 0.0, 3.0), I = random_field(g, rng, 0.0, 3.0);
        const Field div = cross_diffusion_div(S, I);
        double scale = 0.0;
        for (double v : div.values()) scale += std::abs(v);
        EXPECT_LE(std::abs(integrate(div)), 1e-13 * scale * g.cell_measure());
    }
}

TEST(Integrate, MidpointRule) {
    EXPECT_DOUBLE_EQ(integrate(Field(Grid::line(2.0, 5), 1.0)), 2.0);
    EXPECT_EQ(integrate(Field(Grid::line(2.0, 5), 0.0)), 0.0);
    const Grid g = Grid::line(1.0, 128);
    EXPECT_NEAR(integrate(sample(g, [](double x, double) { return x; })), 0.5, 1e-15);
}

TEST(NeumannStiffness, NullspaceSymmetryAndPureReaction) {
    const Grid g = Grid::rect(1.0, 1.0, 7, 5);
    const NeumannOperator A = neumann_stiffness(1.0, Field(g, 0.0));
    const Field null = A.apply(Field(g, 3.0));
    for (double v : null.values()) EXPECT_LE(std::abs(v), 1e-12);

    std::mt19937_64 rng(9);
    const NeumannOperator B = neumann_stiffness(0.7, random_field(g, rng, 0.5, 2.0));
    const Field f = random_field(g, rng), h = random_field(g, rng);
    const double a = inner(B.apply(f), h), b = inner(f, B.apply(h));
    EXPECT_NEAR(a, b, 1e-12 * std::abs(a));

    const Field gamma = random_field(g, rng, 0.5, 2.0);
    const Field out = neumann_stiffness(0.0, gamma).apply(f);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_DOUBLE_EQ(out[k], gamma[k] * f[k]);
}
