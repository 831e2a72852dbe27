#include "sketchdesc/error.hpp"
#include "sketchdesc/schedule.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sketchdesc;

TEST(GammaSchedule, FirstTerms) {
    const auto g = gamma_schedule(1.0, 1);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_DOUBLE_EQ(g[0], 1.0);
    EXPECT_NEAR(g[1], (1.0 + std::sqrt(5.0)) / 2.0, 1e-15);
    EXPECT_DOUBLE_EQ(gamma_schedule(2.0, 0)[0], 0.5);
}

TEST(GammaSchedule, RecursionAndLowerBound) {
    for (double nu : {0.5, 1.0, 10.0}) {
        const auto g = gamma_schedule(nu, 100000);
        for (std::size_t k = 0; k + 1 < g.size(); ++k) {
            const double res = g[k + 1] * g[k + 1] - g[k + 1] / nu - g[k] * g[k];
            ASSERT_LE(std::abs(res), 1e-10 * g[k + 1] * g[k + 1]) << "nu=" << nu << " k=" << k;
            ASSERT_GE(g[k + 1], g[k]);
        }
        for (std::size_t k = 0; k < g.size(); ++k) ASSERT_GE(g[k], (double(k) + 2.0) / (2.0 * nu) * (1 - 1e-15));
    }
}

TEST(GammaSchedule, RejectsNonPositiveNu) {
    EXPECT_THROW(gamma_schedule(0.0, 3), Error);
    EXPECT_THROW(gamma_schedule(-1.0, 3), Error);
    EXPECT_THROW(Schedule::convex(0.0), Error);
}

TEST(Schedule, ConvexStartsAtAlphaOne) {
    auto s = Schedule::convex(1.0);
    const auto p0 = s.next();
    EXPECT_DOUBLE_EQ(p0.gamma, 1.0);
    EXPECT_DOUBLE_EQ(p0.alpha, 1.0);
    EXPECT_DOUBLE_EQ(p0.beta, 1.0);
    const auto p1 = s.next();
    EXPECT_NEAR(p1.alpha, 1.0 / ((1.0 + std::sqrt(5.0)) / 2.0), 1e-15);
    EXPECT_EQ(s.clamps(), 0u);
}

TEST(Schedule, StronglyConvexEqualConstants) {
    auto s = Schedule::strongly_convex(0.25, 0.25);
    for (int k = 0; k < 3; ++k) {
        const auto p = s.next();
        EXPECT_NEAR(p.alpha, 0.5, 1e-15);
        EXPECT_NEAR(p.beta, 0.0, 1e-15);
        EXPECT_NEAR(p.gamma, 4.0, 1e-14);
    }
}

TEST(Schedule, StronglyConvexIdentities) {
    for (auto [sigma, nu] : {std::pair{0.01, 1.0}, {0.3, 2.0}, {1e-4, 3.5}}) {
        auto s = Schedule::strongly_convex(sigma, nu);
        const auto p = s.next();
        const double a = p.alpha, b = p.beta, g = p.gamma;
        EXPECT_NEAR(2 * g * g * nu, 2 * g * (1 - a) / a, 1e-12 * (1 + 2 * g * g * nu));
        EXPECT_NEAR(1 - b - g * sigma, 0.0, 1e-12);
        EXPECT_NEAR(2 * g * g * nu - 2 * g - 2 * g * b * (1 - a) / a, 0.0, 1e-12 * (1 + 2 * g * g * nu));
    }
}

TEST(Schedule, SigmaAboveNuIsRejected) {
    auto s = Schedule::strongly_convex(2.0, 1.0);
    EXPECT_THROW(s.next(), Error);
    EXPECT_THROW(Schedule::strongly_convex(0.0, 1.0), Error);
}

TEST(Schedule, ConvexUnderestimatedNuNeverClamps) {
    // α_k = 1/(γ_k ν) ≤ 1 holds analytically for every ν > 0.
    auto s = Schedule::convex(0.1);
    for (int k = 0; k < 1000; ++k) EXPECT_LE(s.next().alpha, 1.0);
    EXPECT_EQ(s.clamps(), 0u);
}
