#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <magzoll/corpus.hpp>
#include <magzoll/integrable.hpp>
#include <magzoll/zoll.hpp>

#include "oracles.hpp"

using namespace magzoll;
using std::numbers::pi;

namespace {

MagneticSystem constant_system(double b0)
{
    return make_system(PeriodicFunction::constant(1.0), PeriodicFunction::constant(b0), 1.0);
}

// a = 1, b = b0 (1 + 0.3 cos 2 pi x) with b0 = 2 outside the admissible set
MagneticSystem witness()
{
    return make_system(PeriodicFunction::constant(1.0), PeriodicFunction::cosine(2.0, 0.6, 1), 1.0);
}

ZollFamily family(double s_frac, std::size_t xi_index = 1)
{
    const ZollFamily base = make_family(1, xi_index, 0, 0.0, 0.0);
    return make_family(1, xi_index, 0, 0.0, s_frac / base.b_con);
}

} // namespace

TEST(Chart, RefusesSystemsWithoutSection)
{
    const auto sys = make_system(TrigSeries{1.0, {0.1}, {}}, PeriodicFunction::constant(0.0), 1.0);
    EXPECT_THROW(FirstIntegralChart{sys}, SectionConditionViolated);
}

TEST(SolveX, ConstantSystem)
{
    const FirstIntegralChart chart(constant_system(1.7));
    for (double I : {-3.1, 0.0, 0.4, 12.9}) {
        for (double th : {0.0, 0.9, 2.5, 5.0}) {
            EXPECT_NEAR(solve_x(chart, I, th), (std::sin(th) - I) / 1.7, 1e-13);
        }
    }
}

TEST(SolveX, ZollFamilyClosedForm)
{
    const ZollFamily fam = family(0.8);
    const FirstIntegralChart chart(family_system(fam));
    const HarmonicDensity d = fam.density();
    for (double I : {0.0, 0.37, 1.2, -2.4}) {
        for (double th = 0.0; th < 2 * pi; th += 0.41) {
            const double x = solve_x(chart, I, th);
            EXPECT_NEAR(x, d.F(std::sin(th) - I), 1e-12);
            EXPECT_LT(std::abs(chart.system().first_integral(x, th) - I), 1e-12);
        }
    }
}

TEST(SolveX, ResidualOnRandomSystems)
{
    CorpusOptions opt;
    opt.count = 10;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& entry : random_corpus(opt)) {
        const FirstIntegralChart chart(entry.sys);
        for (int i = 0; i < 100; ++i) {
            const double I = (u(rng) - 0.5) * 10.0 * chart.period();
            const double th = 2 * pi * u(rng);
            const double x = solve_x(chart, I, th);
            EXPECT_LT(std::abs(chart.system().first_integral(x, th) - I), 1e-12 * (1.0 + std::abs(I)));
        }
    }
}

TEST(DxDI, ConstantNegativeAndFiniteDifference)
{
    const FirstIntegralChart c(constant_system(2.5));
    EXPECT_NEAR(dx_dI(c, 0.3, 1.0), -1.0 / 2.5, 1e-15);

    const FirstIntegralChart chart(make_system(TrigSeries{1.0, {0.08}, {0.03}}, TrigSeries{1.4, {0.2}, {-0.1}}, 1.0));
    for (double I = 0.0; I < chart.period(); I += 0.17) {
        for (double th = 0.0; th < 2 * pi; th += 0.7) {
            const double v = dx_dI(chart, I, th);
            EXPECT_LT(v, 0.0);
            const double fd = oracle::central_difference([&](double J) { return solve_x(chart, J, th); }, I, 1e-5);
            EXPECT_NEAR(v, fd, 1e-8);
        }
    }
}

TEST(Delta, ConstantSystemVanishes)
{
    const FirstIntegralChart chart(constant_system(1.3));
    for (double I : {0.0, 0.5, 1.0}) EXPECT_NEAR(delta(chart, I), 0.0, 1e-14);
}

TEST(Delta, ZollFamilyVanishes)
{
    for (std::size_t xi_index : {1u, 2u}) {
        const FirstIntegralChart chart(family_system(family(0.6, xi_index)));
        for (int k = 0; k < 12; ++k) {
            EXPECT_LT(std::abs(delta(chart, chart.period() * k / 12.0)), 1e-8);
        }
    }
}

TEST(Delta, WitnessDoesNotVanish)
{
    const FirstIntegralChart chart(witness());
    double biggest = 0.0;
    for (int k = 0; k < 16; ++k) biggest = std::max(biggest, std::abs(delta(chart, chart.period() * k / 16.0)));
    EXPECT_GT(biggest, 1e-2);
}

TEST(ActionS, ConstantSystem)
{
    const FirstIntegralChart chart(constant_system(0.8));
    for (double I : {0.0, 0.3}) EXPECT_NEAR(action_S(chart, I), pi / 0.8, 1e-13);
}

TEST(ActionS, ZollFamilyIsConstant)
{
    const FirstIntegralChart chart(family_system(family(0.8)));
    for (int k = 0; k < 12; ++k) {
        EXPECT_NEAR(action_S(chart, chart.period() * k / 12.0), pi / chart.period(), 1e-8);
    }
}

TEST(ActionS, IntegralIsPi)
{
    CorpusOptions opt;
    opt.count = 4;
    std::vector<MagneticSystem> systems{witness(), family_system(family(0.5))};
    for (auto& e : random_corpus(opt)) systems.push_back(e.sys);
    for (const auto& sys : systems) {
        const FirstIntegralChart chart(sys);
        const ActionIntegral r = action_integral(chart);
        EXPECT_NEAR(r.value, pi, 1e-10);
        EXPECT_LT(r.err_est, 1e-10);
    }
}

TEST(ActionS, ThetaRuleRefinesForSmallMargin)
{
    // a narrow dip of b to 0.15 makes dx/dI sharply peaked in theta
    const auto sys = make_system(PeriodicFunction::constant(1.0), TrigSeries{1.0, {0.85}, {}}, 1.0);
    const FirstIntegralChart fixed(sys, ThetaRule{64, 16, false});
    const FirstIntegralChart refined(sys);
    EXPECT_GT(refined.theta_panels(), 64);
    const FirstIntegralChart reference(sys, ThetaRule{2048, 16, false});
    double err_fixed = 0.0;
    double err_refined = 0.0;
    for (int k = 0; k < 8; ++k) {
        const double I = sys.b_avg() * k / 8.0;
        const double ref = action_S(reference, I);
        err_fixed = std::max(err_fixed, std::abs(action_S(fixed, I) - ref));
        err_refined = std::max(err_refined, std::abs(action_S(refined, I) - ref));
    }
    EXPECT_LT(err_refined, 1e-10);
    EXPECT_LT(err_refined, err_fixed);
}

TEST(ActionS, ProfileTrapezoidOnWellConditionedSystem)
{
    const FirstIntegralChart chart(witness());
    const ActionProfile p = action_profile(chart, 128);
    EXPECT_NEAR(p.integral_S(), pi, 1e-10);
    for (double e : p.err_est) EXPECT_LT(e, 1e-9);
}

// Differentiating S under the integral gives dS/dI = -Delta; see systolic.hpp.
TEST(ActionS, DerivativeIsMinusReturnShift)
{
    CorpusOptions opt;
    opt.count = 3;
    std::vector<MagneticSystem> systems{witness()};
    for (auto& e : random_corpus(opt)) systems.push_back(e.sys);
    const double h = 2e-4;
    for (const auto& sys : systems) {
        const FirstIntegralChart chart(sys);
        double worst = 0.0;
        double biggest_delta = 0.0;
        for (int k = 0; k < 32; ++k) {
            const double I = chart.period() * k / 32.0;
            // five-point stencil; the small-margin corpus member has large higher derivatives
            const double dS = (action_S(chart, I - 2 * h) - 8 * action_S(chart, I - h) + 8 * action_S(chart, I + h) -
                               action_S(chart, I + 2 * h)) /
                              (12 * h);
            const double D = delta(chart, I);
            worst = std::max(worst, std::abs(dS + D));
            biggest_delta = std::max(biggest_delta, std::abs(D));
        }
        EXPECT_LT(worst, 1e-6) << "b_avg " << sys.b_avg();
        EXPECT_GT(biggest_delta, 1e-4);
    }
}

TEST(FlatF, Examples)
{
    const FirstIntegralChart c(constant_system(1.6));
    EXPECT_NEAR(flat_f(c, 0.37), 1.0 / 1.6, 1e-14);

    const ZollFamily fam = family(0.7);
    const FirstIntegralChart chart(family_system(fam));
    const HarmonicDensity d = fam.density();
    double integral = 0.0;
    const int n = 256;
    for (int i = 0; i < n; ++i) {
        const double u = chart.period() * i / n;
        EXPECT_NEAR(flat_f(chart, u), d.f(u), 1e-12);
        integral += flat_f(chart, u) * chart.period() / n;
    }
    EXPECT_NEAR(integral, 1.0, 1e-12);

    const FirstIntegralChart bent(make_system(TrigSeries{1.0, {0.1}, {}}, PeriodicFunction::constant(2.0), 1.0));
    EXPECT_THROW(flat_f(bent, 0.1), FlatOnly);
}

TEST(Fourier, ConstantSystemHasNoHarmonics)
{
    const FirstIntegralChart chart(constant_system(1.1));
    for (long m : {1L, -2L, 5L}) {
        EXPECT_LT(std::abs(S_fourier(chart, m, FourierMethod::Direct, 64)), 1e-13);
        EXPECT_LT(std::abs(S_fourier(chart, m, FourierMethod::FlatClosedForm)), 1e-13);
    }
    EXPECT_THROW(S_fourier(chart, 0, FourierMethod::Direct), ParameterOutOfRange);
}

TEST(Fourier, ZollFamilyHasNoHarmonics)
{
    const FirstIntegralChart chart(family_system(family(0.8)));
    const ActionProfile p = action_profile(chart, 64);
    for (long m = -4; m <= 4; ++m) {
        if (m == 0) continue;
        EXPECT_LT(std::abs(S_fourier(p, m)), 1e-8) << m;
        EXPECT_LT(std::abs(S_fourier_closed_form(chart, m)), 1e-8) << m;
    }
}

// Pins the constant in the closed form: the product with the J1 of the
// library (= 2 pi J1 standard) and no further factor matches the definition.
TEST(Fourier, ClosedFormNormalizationPinnedByDirectQuadrature)
{
    for (double b_avg : {1.0, 2.0, 3.3}) {
        const MagneticSystem sys = harmonic_system({b_avg, 1, 0.0, 0.3 / b_avg});
        const FirstIntegralChart chart(sys);
        const ActionProfile p = action_profile(chart, 128);
        const std::complex<double> direct = S_fourier(p, 1);
        const std::complex<double> closed = S_fourier_closed_form(chart, 1);
        ASSERT_GT(std::abs(direct), 1e-4);
        EXPECT_LT(std::abs(direct - closed) / std::abs(direct), 1e-6) << "b_avg=" << b_avg;
        // the variant with an extra 1/(2 pi) is off by exactly that factor
        EXPECT_NEAR(std::abs(closed / (2 * pi)) / std::abs(direct), 1.0 / (2 * pi), 1e-8);
    }
}

TEST(Fourier, MultiHarmonicFlatSystemAgrees)
{
    const MagneticSystem sys =
        make_system(PeriodicFunction::constant(1.0), TrigSeries{1.3, {0.25, 0.0, 0.08}, {0.1, 0.15}}, 1.0);
    const FirstIntegralChart chart(sys);
    const ActionProfile p = action_profile(chart, 256);
    for (long m = -6; m <= 6; ++m) {
        if (m == 0) continue;
        const auto d = S_fourier(p, m);
        const auto c = S_fourier_closed_form(chart, m);
        EXPECT_LT(std::abs(d - c), 1e-6 * std::abs(c) + 1e-14) << "m=" << m;
    }
}

TEST(Fourier, RigiditySingleHarmonicIsNotConstant)
{
    const MagneticSystem sys = harmonic_system({2.0, 1, 0.0, 0.3 / 2.0});
    const FirstIntegralChart chart(sys);
    ASSERT_GT(std::abs(bessel_j1_2pi(2 * pi / 2.0)), 1e-3);
    const ActionProfile p = action_profile(chart, 128);
    double biggest = 0.0;
    for (long m = 1; m <= 8; ++m) biggest = std::max(biggest, std::abs(S_fourier(p, m)));
    EXPECT_GT(biggest, 1e-4);
    EXPECT_GT(p.max_S() - p.min_S(), 1e-4);
}

TEST(Profile, GridAndPeriodicity)
{
    const FirstIntegralChart chart(witness());
    const ActionProfile p = action_profile(chart, 32, 0.25);
    ASSERT_EQ(p.size(), 32u);
    EXPECT_DOUBLE_EQ(p.I_grid[0], 0.25);
    EXPECT_NEAR(p.I_grid[31] - p.I_grid[0], chart.period() * 31 / 32, 1e-14);
    // S and Delta are <b>-periodic in the lift of I
    EXPECT_NEAR(action_S(chart, 0.25 + chart.period()), p.S_vals[0], 1e-13);
    EXPECT_NEAR(delta(chart, 0.25 - 3 * chart.period()), p.Delta_vals[0], 1e-13);
}

TEST(Profile, IndependentOfWorkerCount)
{
    const FirstIntegralChart chart(witness());
    const auto levels1 = parallel_map<double>(24, [&](std::size_t k) { return action_S(chart, 0.1 * k); }, 1);
    const auto levels3 = parallel_map<double>(24, [&](std::size_t k) { return action_S(chart, 0.1 * k); }, 3);
    EXPECT_EQ(levels1, levels3);
}
