#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <magzoll/bessel.hpp>

#include "oracles.hpp"

using namespace magzoll;
using std::numbers::pi;

namespace {

double oracle_zero(double lo, double hi)
{
    return oracle::bisect(oracle::bessel_j1_series, lo, hi, 1e-14);
}

} // namespace

TEST(BesselJ1TwoPi, SmallArgumentLimit)
{
    // J1(z) ~ z/2, so the 2 pi normalization gives 2 pi * 1e-4 / 2
    EXPECT_NEAR(bessel_j1_2pi(1e-4), pi * 1e-4, 1e-10);
}

TEST(BesselJ1TwoPi, MatchesPowerSeriesAtOne)
{
    EXPECT_NEAR(bessel_j1_2pi(1.0), 2.0 * pi * oracle::bessel_j1_series(1.0), 1e-12);
}

TEST(BesselJ1TwoPi, MatchesPowerSeriesOnGrid)
{
    for (double xi = 0.1; xi <= 10.0; xi += 0.05) {
        EXPECT_NEAR(bessel_j1_2pi(xi) / (2.0 * pi), oracle::bessel_j1_series(xi), 1e-10) << "xi=" << xi;
    }
}

TEST(BesselJ1TwoPi, VanishesAtFirstZero)
{
    const auto table = j1_zeros(1);
    EXPECT_LT(std::abs(bessel_j1_2pi(table.xi(1))), 1e-8);
}

TEST(BesselJ1TwoPi, DerivativeMatchesFiniteDifference)
{
    for (double xi : {0.7, 2.3, 5.1, 9.4}) {
        const double fd = oracle::central_difference(bessel_j1_2pi, xi, 1e-5);
        EXPECT_NEAR(bessel_j1_2pi_derivative(xi), fd, 1e-7);
    }
}

TEST(J1Zeros, FirstTwoAgainstBisectionOracle)
{
    const auto table = j1_zeros(2);
    EXPECT_NEAR(table.xi(1), oracle_zero(3.5, 4.0), 1e-9);
    EXPECT_NEAR(table.xi(2), oracle_zero(6.8, 7.2), 1e-9);
    EXPECT_NEAR(table.xi(1), 3.8317059702, 1e-9);
    EXPECT_NEAR(table.xi(2), 7.0155866698, 1e-9);
}

TEST(J1Zeros, CertifiedBracketsAndSpacing)
{
    const auto table = j1_zeros(20);
    ASSERT_EQ(table.size(), 20u);
    double last_gap_error = 1.0;
    for (std::size_t k = 1; k <= table.size(); ++k) {
        const auto& z = table.zeros[k - 1];
        EXPECT_EQ(z.k, k);
        EXPECT_LE(z.bracket_halfwidth, 1e-12);
        EXPECT_LT(bessel_j1_2pi(z.xi - 1e-9) * bessel_j1_2pi(z.xi + 1e-9), 0.0);
        if (k >= 2) {
            const double gap = table.xi(k) - table.xi(k - 1);
            EXPECT_GT(gap, 1.0);
            const double gap_error = std::abs(gap - pi);
            EXPECT_LT(gap_error, last_gap_error) << "k=" << k;
            last_gap_error = gap_error;
        }
    }
    EXPECT_LT(last_gap_error, 1e-3);
}

TEST(J1Zeros, RejectsEmptyTable)
{
    EXPECT_THROW(j1_zeros(0), ParameterOutOfRange);
}

TEST(AdmissibleLevels, FirstLevel)
{
    const auto table = j1_zeros(1);
    // 2 pi / 3.8317059702 = 1.6397880 (the often quoted 1.63984 is a rounding slip)
    EXPECT_NEAR(2.0 * pi / table.xi(1), 2.0 * pi / oracle_zero(3.5, 4.0), 1e-12);
    EXPECT_NEAR(2.0 * pi / table.xi(1), 1.6397880, 1e-7);
}

TEST(AdmissibleLevels, CoveringFactorTwo)
{
    const auto table = j1_zeros(1);
    const auto reps_1 = representations_of(2.0 * pi / table.xi(1), 2, table);
    const auto reps_2 = representations_of(4.0 * pi / table.xi(1), 2, table);
    ASSERT_EQ(reps_1.size(), 1u);
    ASSERT_EQ(reps_2.size(), 1u);
    EXPECT_EQ(reps_2[0].first, 2 * reps_1[0].first);
    const auto levels = admissible_levels(2, 1, table);
    ASSERT_EQ(levels.size(), 2u);
    EXPECT_DOUBLE_EQ(levels[1].value, 2.0 * levels[0].value);
}

TEST(AdmissibleLevels, FirstLevelHasSingleRepresentationInScan)
{
    const auto table = j1_zeros(50);
    EXPECT_EQ(representations_of(2.0 * pi / table.xi(1), 50, table).size(), 1u);
}

TEST(AdmissibleLevels, EveryRepresentationIsAZero)
{
    const auto table = j1_zeros(8);
    const auto levels = admissible_levels(8, 8, table);
    std::size_t total = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i > 0) {
            EXPECT_GT(levels[i].value - levels[i - 1].value, 1e-9);
        }
        for (const auto& [n, k] : levels[i].representations) {
            EXPECT_LT(std::abs(bessel_j1_2pi(2.0 * pi * static_cast<double>(n) / levels[i].value)), 1e-7);
        }
        total += levels[i].d();
    }
    EXPECT_EQ(total, 64u);
}
