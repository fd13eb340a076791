#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gbsde/errors.hpp"
#include "gbsde/gcalc.hpp"

using namespace gbsde;

TEST(GCoefficients, RejectsBadBands) {
    EXPECT_THROW(GCoefficients(0.0, 1.0), DomainError);
    EXPECT_THROW(GCoefficients(1.0, 0.5), DomainError);
    EXPECT_THROW(GCoefficients(0.5, INFINITY), DomainError);
    EXPECT_THROW(GCoefficients(NAN, 1.0), DomainError);
    EXPECT_NO_THROW(GCoefficients(0.7, 0.7));
    EXPECT_TRUE(GCoefficients(0.7, 0.7).degenerate());
}

TEST(GEval, ClosedFormValues) {
    const GCoefficients band(0.5, 1.0);
    EXPECT_DOUBLE_EQ(g_eval(band, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(g_eval(band, -2.0), -0.25);
    EXPECT_EQ(g_eval(band, 0.0), 0.0);
    EXPECT_EQ(g_eval(GCoefficients(0.3, 2.0), 0.0), 0.0);
}

TEST(GEval, RejectsNonFinite) {
    const GCoefficients band(0.5, 1.0);
    EXPECT_THROW(g_eval(band, NAN), DomainError);
    EXPECT_THROW(hjb_sup_form(band, INFINITY), DomainError);
}

TEST(HjbSupForm, EndpointValues) {
    const GCoefficients band(0.5, 1.0);
    EXPECT_DOUBLE_EQ(hjb_sup_form(band, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(hjb_sup_form(band, -2.0), -0.25);
    EXPECT_DOUBLE_EQ(hjb_sup_form(GCoefficients(0.7, 0.7), 3.0), 0.735);
}

TEST(HjbSupForm, MatchesGEvalAndDenseSup) {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> coef(0.05, 2.0);
    std::uniform_real_distribution<double> arg(-50.0, 50.0);
    for (int k = 0; k < 2000; ++k) {
        const double a = coef(gen);
        const double b = coef(gen);
        const GCoefficients band(std::min(a, b), std::max(a, b));
        const double x = arg(gen);
        EXPECT_EQ(hjb_sup_form(band, x), g_eval(band, x));
        // Brute-force sup over a fine volatility grid never exceeds the endpoint form.
        double dense = -INFINITY;
        for (int i = 0; i <= 64; ++i) {
            const double v = band.sigma_low() + (band.sigma_high() - band.sigma_low()) * i / 64.0;
            dense = std::max(dense, 0.5 * v * v * x);
        }
        EXPECT_NEAR(dense, g_eval(band, x), 1e-12 * (1.0 + std::fabs(x)));
    }
}

TEST(GEval, SublinearMonotoneHomogeneous) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> arg(-10.0, 10.0);
    std::uniform_real_distribution<double> scale(0.0, 10.0);
    const GCoefficients band(0.5, 1.0);
    for (int k = 0; k < 10000; ++k) {
        const double a = arg(gen);
        const double b = arg(gen);
        const double lam = scale(gen);
        const double tol = 1e-12 * (1.0 + std::fabs(a) + std::fabs(b)) * (1.0 + lam);
        EXPECT_LE(g_eval(band, a + b), g_eval(band, a) + g_eval(band, b) + tol);
        EXPECT_NEAR(g_eval(band, lam * a), lam * g_eval(band, a), tol);
        if (a <= b) EXPECT_LE(g_eval(band, a), g_eval(band, b));
        EXPECT_GE(g_eval(band, a), -g_eval(band, -a) - tol);
    }
}

// Oracle values computed at 50 digits with mpmath from the closed form.
TEST(ReverseHolder, HighPrecisionOracle) {
    EXPECT_NEAR(reverse_holder_threshold(2.0), 0.04945999305692501, 1e-15);
    EXPECT_NEAR(reverse_holder_threshold(3.0), 0.012320960922869108, 1e-16);
    EXPECT_NEAR(reverse_holder_threshold(10.0), 0.00027029957542114253, 1e-18);
    EXPECT_NEAR(reverse_holder_threshold(1.0001), 2.0847511971425426, 1e-12);
    EXPECT_NEAR(reverse_holder_threshold(1e6), 2.500001875e-19, 1e-27);
}

TEST(ReverseHolder, ShapeAndDomain) {
    EXPECT_GT(reverse_holder_threshold(1.0001), reverse_holder_threshold(2.0));
    EXPECT_LT(reverse_holder_threshold(1e6), 1e-6);
    double prev = INFINITY;
    for (double q = 1.001; q < 1e4; q *= 1.3) {
        const double v = reverse_holder_threshold(q);
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_THROW(reverse_holder_threshold(1.0), DomainError);
    EXPECT_THROW(reverse_holder_threshold(0.5), DomainError);
    EXPECT_THROW(reverse_holder_threshold(NAN), DomainError);
}

TEST(GEval, NonDegenerateWithHalfLowerVariance) {
    std::mt19937_64 gen(19);
    std::uniform_real_distribution<double> arg(-10.0, 10.0);
    const GCoefficients band(0.5, 1.0);
    for (int k = 0; k < 10000; ++k) {
        double a = arg(gen);
        double b = arg(gen);
        if (a < b) std::swap(a, b);
        const double tol = 1e-12 * (1.0 + std::fabs(a) + std::fabs(b));
        EXPECT_GE(g_eval(band, a) - g_eval(band, b), 0.5 * band.var_low() * (a - b) - tol);
    }
    // The constant is sharp: equality for a, b both negative.
    EXPECT_DOUBLE_EQ(g_eval(band, -1.0) - g_eval(band, -3.0), 0.5 * band.var_low() * 2.0);
}
