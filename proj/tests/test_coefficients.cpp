#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lorentz/coefficients.hpp"
#include "oracles.hpp"

using namespace lorentz;

TEST(SCCoeff, ClosedFormCases)
{
    auto [s0, c0] = s_c_coeff(0.0, 2.0);
    EXPECT_EQ(s0, 2.0);
    EXPECT_EQ(c0, 1.0);
    auto [s1, c1] = s_c_coeff(1.0, std::numbers::pi / 2);
    EXPECT_NEAR(s1, 1.0, 1e-15);
    EXPECT_NEAR(c1, 0.0, 1e-15);
    auto [s2, c2] = s_c_coeff(-1.0, 1.0);
    EXPECT_NEAR(s2, 1.1752011936438014, 1e-15);
    EXPECT_NEAR(c2, 1.5430806348152437, 1e-15);
}

TEST(Sigma, ClosedFormCases)
{
    EXPECT_NEAR(sigma(1.0, 0.5, std::numbers::pi / 2).value(), std::sqrt(0.5), 1e-15);
    for (double k : {-3.0, 0.0, 2.0}) EXPECT_EQ(sigma(k, 0.3, 0.0).value(), 0.3);
    EXPECT_NEAR(sigma(-1.0, 0.5, 2.0).value(), 0.32402713683194267, 1e-15);
    EXPECT_TRUE(sigma(1.0, 0.5, 3.2).is_plus_infinity());
    EXPECT_TRUE(sigma(4.0, 0.2, 2.0).is_plus_infinity());
}

TEST(Sigma, DomainErrors)
{
    EXPECT_THROW(sigma(0.0, 1.5, 1.0), DomainError);
    EXPECT_THROW(sigma(0.0, 0.5, -1.0), DomainError);
}

TEST(Sigma, MatchesFiftyDigitReference)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> k(-4, 4), t(0, 1), th(0, 3);
    for (int s = 0; s < 2000; ++s) {
        const double kv = k(rng), tv = t(rng), thv = th(rng);
        const auto ref = oracle::sigma(kv, tv, thv);
        const ExtReal got = sigma(kv, tv, thv);
        if (!ref) {
            EXPECT_TRUE(got.is_plus_infinity());
            continue;
        }
        const double r = double(*ref);
        EXPECT_LE(std::abs(got.value() - r), 1e-12 * std::max(std::abs(r), 1e-300)) << kv << " " << tv << " " << thv;
    }
}

TEST(Sigma, TaylorBranchNearZero)
{
    for (double u : {1e-12, 1e-10, 3e-9, -5e-9}) {
        const double theta = std::sqrt(std::abs(u));
        const double kappa = u < 0 ? -1.0 : 1.0;
        const double ref = double(*oracle::sigma(kappa, 0.37, theta));
        EXPECT_NEAR(sigma(kappa, 0.37, theta).value(), ref, 1e-15);
    }
}

TEST(TauCoeff, Cases)
{
    EXPECT_NEAR(tau_coeff(0.0, 2.0, 0.25, 1.0).value(), 0.25, 1e-15);
    EXPECT_NEAR(tau_coeff(3.0, 4.0, 1.0, 0.7).value(), 1.0, 1e-15);
    EXPECT_NEAR(tau_coeff(-1.0, 2.0, 0.5, 2.0).value(), 0.40250909109729599, 1e-14);
    EXPECT_THROW(tau_coeff(0.0, 1.0, 0.5, 1.0), DomainError);
}

TEST(Hawking, CaseTable)
{
    EXPECT_DOUBLE_EQ(hawking_threshold<double>({-2, 0, 3}), 1.0);
    EXPECT_DOUBLE_EQ(hawking_threshold<double>({-1, 0, 2}), 1.0);
    EXPECT_NEAR(hawking_threshold<double>({0, 4, 2}), std::numbers::pi / 4, 1e-15);
    EXPECT_NEAR(hawking_threshold<double>({-2, -1, 2}), 0.5 * std::log(3.0), 1e-15);
    EXPECT_THROW(hawking_threshold<double>({0.5, 0, 2}), RegimeError);
    EXPECT_THROW(hawking_threshold<double>({-0.5, -1, 2}), RegimeError);
    EXPECT_THROW(hawking_threshold<double>({-1, 0, 1}), RegimeError);
}

TEST(Hawking, PositiveCurvatureIsContinuousAcrossZeroMeanCurvature)
{
    const double at0 = hawking_threshold<double>({0, 2, 3});
    EXPECT_NEAR(hawking_threshold<double>({1e-9, 2, 3}), at0, 1e-8);
    EXPECT_NEAR(hawking_threshold<double>({-1e-9, 2, 3}), at0, 1e-8);
    // H0 → -∞ shrinks the bound to 0
    EXPECT_LT(hawking_threshold<double>({-1e6, 2, 3}), 1e-5);
}

TEST(Hawking, ThresholdSolvesRiccatiComparison)
{
    // D is the first zero of 𝔠_κ(t) + (H0/(N-1)) 𝔰_κ(t), κ = K/(N-1).
    for (auto [H0, K, N] : {std::tuple{-2.0, -1.0, 2.0}, {-3.0, -2.0, 3.0}, {0.7, 1.0, 3.0}, {-1.0, 5.0, 2.5}}) {
        const double D = hawking_threshold<double>({H0, K, N});
        const auto [s, c] = s_c_coeff(K / (N - 1), D);
        EXPECT_NEAR(c + H0 / (N - 1) * s, 0.0, 1e-12);
    }
}

TEST(EntropyExp, Cases)
{
    EXPECT_EQ(entropy_exp(ExtReal::finite(0), 5.0), 1.0);
    EXPECT_NEAR(entropy_exp(ExtReal::finite(-std::log(4.0)), 2.0), 2.0, 1e-15);
    EXPECT_EQ(entropy_exp(ExtReal::plus_infinity(), 3.0), 0.0);
    EXPECT_THROW(entropy_exp(ExtReal::finite(0), 0.0), DomainError);
}

TEST(Extended, Ordering)
{
    EXPECT_TRUE(ExtReal::minus_infinity() < ExtReal::finite(-1e300));
    EXPECT_TRUE(ExtReal::finite(1e300) < ExtReal::plus_infinity());
    EXPECT_FALSE(ExtReal::plus_infinity() < ExtReal::plus_infinity());
    EXPECT_EQ(ExtReal::finite(2), ExtReal::finite(2));
}
