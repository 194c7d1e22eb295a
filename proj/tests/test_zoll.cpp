#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <magzoll/flow.hpp>
#include <magzoll/zoll.hpp>

#include "oracles.hpp"

using namespace magzoll;
using std::numbers::pi;

namespace {

double b_con(std::size_t n, std::size_t xi_index)
{
    return make_family(n, xi_index, 0, 0.0, 0.0).b_con;
}

} // namespace

TEST(MakeFamily, ZeroParameterIsTheConstantSystem)
{
    const ZollFamily fam = make_family(1, 1, 0, 0.0, 0.0);
    EXPECT_NEAR(fam.b_con, 2 * pi / 3.8317059702, 1e-9);
    EXPECT_EQ(fam.m0, 1u);
    const MagneticSystem sys = family_system(fam);
    for (double x : {0.0, 0.3, 0.71}) EXPECT_DOUBLE_EQ(sys.b()(x), fam.b_con);
}

TEST(MakeFamily, NearEndpointFieldIsLargeButFinite)
{
    const double bc = b_con(1, 1);
    const ZollFamily fam = make_family(1, 1, 0, 0.0, 0.999 / bc);
    EXPECT_FALSE(fam.clamped);
    const MagneticSystem sys = family_system(fam);
    // b peaks where f = (1 - 0.999) / b_con, i.e. at 1000 b_con
    const double peak = sys.b()(fam.density().F(0.5 * fam.b_con));
    EXPECT_GT(peak, 100.0 * bc);
    EXPECT_TRUE(std::isfinite(peak));
    EXPECT_NEAR(sys.b_avg(), bc, 1e-10);
}

TEST(MakeFamily, RejectsEndpointAndBeyond)
{
    const double bc = b_con(1, 1);
    EXPECT_THROW(make_family(1, 1, 0, 0.0, 1.0 / bc), ParameterOutOfRange);
    EXPECT_THROW(make_family(1, 1, 0, 0.0, -1.5 / bc), ParameterOutOfRange);
    EXPECT_THROW(make_family(0, 1, 0, 0.0, 0.0), ParameterOutOfRange);
    EXPECT_THROW(make_family(1, 0, 0, 0.0, 0.0), ParameterOutOfRange);
}

TEST(MakeFamily, RejectsNonAdmissibleHarmonic)
{
    // 2 pi * 2 / b_con = 2 xi_1 is not a zero of J1
    EXPECT_THROW(make_family(1, 1, 2, 0.0, 0.1), NotAdmissible);
}

TEST(MakeFamily, ClampsWithinMarginOfEndpoint)
{
    const double bc = b_con(1, 2);
    const ZollFamily fam = make_family(1, 2, 0, 0.0, (1.0 - 1e-9) / bc);
    EXPECT_TRUE(fam.clamped);
    EXPECT_DOUBLE_EQ(fam.s, (1.0 - 1e-9) / bc);
    EXPECT_DOUBLE_EQ(fam.s_eff, (1.0 - zoll_clamp_margin) / bc);
}

TEST(HarmonicDensity, InverseAndQuasiPeriodicity)
{
    const HarmonicDensity d{b_con(1, 1), 1, 0.0, 0.95 / b_con(1, 1)};
    for (double x = -1.5; x < 2.5; x += 0.0731) {
        EXPECT_NEAR(d.F(d.F_inverse(x)), x, 1e-13);
    }
    for (double u = -3.0; u < 3.0; u += 0.29) {
        EXPECT_NEAR(d.F(u + d.b_avg), d.F(u) + 1.0, 1e-14);
        EXPECT_NEAR(d.f(u), oracle::central_difference([&d](double v) { return d.F(v); }, u, 1e-5), 1e-8);
    }
}

TEST(FamilySystem, KeepsAverageAndLift)
{
    for (std::size_t xi_index : {1u, 2u}) {
        const double bc = b_con(1, xi_index);
        for (double frac : {0.2, 0.6, 0.9}) {
            const ZollFamily fam = make_family(1, xi_index, 0, 0.0, frac / bc);
            const MagneticSystem sys = family_system(fam);
            EXPECT_NEAR(sys.b_avg(), bc, 1e-10);
            const double mean = oracle::trapezoid([&sys](double x) { return sys.b()(x); }, 0.0, 1.0, 4000);
            EXPECT_NEAR(mean, bc, 1e-8);
            for (double x = 0.05; x < 1.0; x += 0.15) {
                const double fd = oracle::central_difference([&sys](double u) { return sys.lift(u); }, x, 1e-5);
                EXPECT_NEAR(fd, sys.b()(x), 1e-6 * sys.b()(x));
                EXPECT_NEAR(sys.b()(x), 1.0 / fam.density().f(sys.lift(x)), 1e-10 * sys.b()(x));
            }
        }
    }
}

TEST(FamilySystem, FirstVariationIsMinusBSquaredCosine)
{
    const double bc = b_con(1, 1);
    const double h = 1e-5;
    const MagneticSystem plus = family_system(make_family(1, 1, 0, 0.0, h));
    const MagneticSystem minus = family_system(make_family(1, 1, 0, 0.0, -h));
    for (double x = 0.0; x < 1.0; x += 0.0625) {
        const double db = (plus.b()(x) - minus.b()(x)) / (2 * h);
        EXPECT_NEAR(db, -bc * bc * std::cos(2 * pi * x), 1e-6);
    }
}

TEST(ClosedForm, ZeroParameterIsACircle)
{
    const ZollFamily fam = make_family(1, 1, 0, 0.0, 0.0);
    const double I = 0.4;
    const oracle::Circle c{fam.b_con, -I / fam.b_con - 1.0 / fam.b_con, 0.0, -pi / 2};
    for (double th = -pi / 2; th < 3 * pi / 2; th += 0.2) {
        const PlanePoint p = closed_form_geodesic(fam, I, th);
        const double t = (th + pi / 2) / fam.b_con;
        EXPECT_NEAR(p.x, c.x(t), 1e-14);
        EXPECT_NEAR(p.y, c.y(t), 1e-14);
    }
}

TEST(ClosedForm, OrbitsClose)
{
    const double bc = b_con(1, 2);
    const ZollFamily fam = make_family(1, 2, 0, 0.0, 0.8 / bc);
    for (double I : {0.0, 0.5, 1.3}) {
        const PlanePoint a = closed_form_geodesic(fam, I, -pi / 2);
        const PlanePoint b = closed_form_geodesic(fam, I, 3 * pi / 2);
        EXPECT_NEAR(a.x, b.x, 1e-14);
        EXPECT_NEAR(a.y, b.y, 1e-12);
        const auto orbit = closed_form_orbit(fam, I, 256);
        ASSERT_EQ(orbit.size(), 257u);
        EXPECT_NEAR(orbit.front().y, orbit.back().y, 1e-12);
        for (std::size_t j = 0; j < orbit.size(); j += 37) {
            const PlanePoint p = closed_form_geodesic(fam, I, -pi / 2 + 2 * pi * j / 256.0);
            EXPECT_NEAR(orbit[j].x, p.x, 1e-14);
            EXPECT_NEAR(orbit[j].y, p.y, 1e-12);
        }
    }
}

TEST(ClosedForm, CoveringRelation)
{
    // n = 2 with s/2 is the n = 1 family with s, scaled by one half
    const double bc = b_con(1, 1);
    const ZollFamily one = make_family(1, 1, 0, 0.0, 0.7 / bc);
    const ZollFamily two = make_family(2, 1, 0, 0.0, 0.35 / bc);
    EXPECT_NEAR(two.b_con, 2.0 * one.b_con, 1e-14);
    for (double I : {0.0, 0.8}) {
        for (double th = -pi / 2; th < 3 * pi / 2; th += 0.3) {
            const PlanePoint p1 = closed_form_geodesic(one, I, th);
            const PlanePoint p2 = closed_form_geodesic(two, I, th);
            EXPECT_NEAR(p2.x, 0.5 * p1.x, 1e-13);
            EXPECT_NEAR(p2.y, 0.5 * p1.y, 1e-13);
        }
    }
    const MagneticSystem s1 = family_system(one);
    const MagneticSystem s2 = family_system(two);
    for (double x = 0.0; x < 0.5; x += 0.07) EXPECT_NEAR(s2.b()(x), 2.0 * s1.b()(2.0 * x), 1e-10);
}

TEST(ClosedForm, ShiftedPhaseAgreesWithOde)
{
    const double bc = b_con(1, 1);
    const ZollFamily fam = make_family(1, 1, 0, 0.13, 0.6 / bc);
    const MagneticSystem sys = family_system(fam);
    const FirstIntegralChart chart(sys);
    for (double I : {0.2, 1.1}) {
        EXPECT_LT(std::abs(delta(chart, I)), 1e-8);
        const PlanePoint p0 = closed_form_geodesic(fam, I, -pi / 2);
        EXPECT_NEAR(p0.x, solve_x(chart, I, -pi / 2), 1e-12);
        const auto traj = integrate_geodesic(sys, {0.0, p0.x, p0.y, -pi / 2}, StopCondition::theta(2 * pi));
        for (std::size_t i = 0; i < traj.states.size(); i += 5) {
            const PlanePoint p = closed_form_geodesic(fam, I, traj.states[i].theta);
            EXPECT_NEAR(traj.states[i].x, p.x, 1e-7);
            EXPECT_NEAR(traj.states[i].y, p.y, 1e-7);
        }
    }
}

TEST(VerifyZoll, FamilyPasses)
{
    const double bc = b_con(1, 2);
    const FirstIntegralChart chart(family_system(make_family(1, 2, 0, 0.0, 0.5 / bc)));
    const ZollReport rep = verify_zoll(chart, 8);
    EXPECT_TRUE(rep.passed);
    EXPECT_LT(rep.max_abs_delta, 1e-8);
    EXPECT_LT(rep.max_closure_defect, 1e-8);
    EXPECT_LT(rep.max_S_deviation, 1e-8);
}

TEST(VerifyZoll, ConstantPasses)
{
    const FirstIntegralChart chart(
        make_system(PeriodicFunction::constant(1.0), PeriodicFunction::constant(2.0), 1.0));
    EXPECT_TRUE(verify_zoll(chart, 4).passed);
}

TEST(VerifyZoll, NonAdmissibleHarmonicFails)
{
    const FirstIntegralChart chart(harmonic_system({2.0, 1, 0.0, 0.15}));
    const ZollReport rep = verify_zoll(chart, 8);
    EXPECT_FALSE(rep.passed);
    EXPECT_GT(rep.max_abs_delta, 1e-4);
    EXPECT_GT(rep.max_closure_defect, 1e-4);
}
