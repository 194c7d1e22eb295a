#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"
#include "integrable.hpp"
#include "system.hpp"

namespace magzoll {

/// Point on the unit tangent bundle in lifted coordinates, with arclength t.
/// Velocity is (cos theta, sin theta / a(x)), unit length for g by construction.
struct GeodesicState {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

using Vec3 = std::array<double, 3>;

/// Geodesic vector field: x' = cos th, y' = sin th / a, th' = b - (a'/a) sin th.
inline Vec3 geodesic_rhs(const MagneticSystem& sys, const Vec3& u)
{
    double a, da;
    if (sys.a().is_series()) {
        const auto j = sys.a().series().jet(u[0]);
        a = j.value;
        da = j.d1;
    } else {
        a = sys.a()(u[0]);
        da = sys.a().derivative(u[0]);
    }
    const double s = std::sin(u[2]);
    return {std::cos(u[2]), s / a, sys.b()(u[0]) - da / a * s};
}

/// Quartic continuous extension of one accepted Dormand-Prince step.
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    std::array<Vec3, 5> r{};

    Vec3 eval(double t) const
    {
        const double s = (t - t0) / h;
        const double s1 = 1.0 - s;
        Vec3 out{};
        for (std::size_t i = 0; i < 3; ++i) {
            out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        return out;
    }
};

struct IntegratorOptions {
    double tol = 1e-11;           ///< local error per unit time, absolute = relative
    double h_init = 0.0;          ///< 0 picks a step from the field magnitude
    double h_min = 1e-14;
    std::size_t max_steps = 20'000'000;
    double max_time = 1e7;        ///< safety cap for theta-span runs
    bool require_theta_increasing = false;
};

struct StopCondition {
    enum class Kind { TimeSpan, ThetaSpan };
    Kind kind = Kind::ThetaSpan;
    double span = two_pi;

    static StopCondition time(double t) { return {Kind::TimeSpan, t}; }
    static StopCondition theta(double dtheta) { return {Kind::ThetaSpan, dtheta}; }
};

/// Integrated geodesic: samples at accepted steps plus dense output.
struct Trajectory {
    std::vector<GeodesicState> states;
    std::vector<double> I_vals;  ///< first integral at each sample
    std::vector<DenseSegment> segments;
    double I0 = 0.0;
    double L = 1.0;
    double tol = 0.0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;

    const GeodesicState& front() const { return states.front(); }
    const GeodesicState& back() const { return states.back(); }
    double duration() const { return back().t - front().t; }

    GeodesicState at(double t) const
    {
        auto it = std::upper_bound(segments.begin(), segments.end(), t,
                                   [](double v, const DenseSegment& s) { return v < s.t0; });
        const DenseSegment& seg = (it == segments.begin()) ? segments.front() : *(it - 1);
        const Vec3 u = seg.eval(t);
        return {t, u[0], u[1], u[2]};
    }
};

namespace detail {

struct DopriStep {
    Vec3 y1{};
    Vec3 k7{};
    double err = 0.0;
    DenseSegment dense;
};

/// One Dormand-Prince 5(4) step from (t, y) with first stage k1 (FSAL).
inline DopriStep dopri_step(const MagneticSystem& sys, double t, const Vec3& y, const Vec3& k1, double h, double tol)
{
    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                     a65 = -5103.0 / 18656.0;
    constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                     a76 = 11.0 / 84.0;
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                     e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    auto stage = [&](auto&& combine) {
        Vec3 u{};
        for (std::size_t i = 0; i < 3; ++i) u[i] = y[i] + h * combine(i);
        return geodesic_rhs(sys, u);
    };
    const Vec3 k2 = stage([&](std::size_t i) { return a21 * k1[i]; });
    const Vec3 k3 = stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
    const Vec3 k4 = stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
    const Vec3 k5 = stage([&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
    const Vec3 k6 = stage(
        [&](std::size_t i) { return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]; });

    DopriStep out;
    for (std::size_t i = 0; i < 3; ++i) {
        out.y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    out.k7 = geodesic_rhs(sys, out.y1);

    double err2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * out.k7[i]);
        const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(out.y1[i]));
        err2 += (e / sc) * (e / sc);
    }
    out.err = std::sqrt(err2 / 3.0);

    out.dense.t0 = t;
    out.dense.h = h;
    for (std::size_t i = 0; i < 3; ++i) {
        const double ydiff = out.y1[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        out.dense.r[0][i] = y[i];
        out.dense.r[1][i] = ydiff;
        out.dense.r[2][i] = bspl;
        out.dense.r[3][i] = ydiff - h * out.k7[i] - bspl;
        out.dense.r[4][i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * out.k7[i]);
    }
    return out;
}

} // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of the geodesic equations.
///
/// ThetaSpan stops exactly where theta first reaches theta0 + span: the
/// crossing is located by secant iteration on the dense polynomial, then the
/// final step is recomputed with the located length and Newton-corrected so
/// the end state carries full step accuracy.
inline Trajectory integrate_geodesic(const MagneticSystem& sys, const GeodesicState& init, StopCondition stop,
                                     const IntegratorOptions& opt = {})
{
    if (!(opt.tol >= 1e-15)) {
        // below this the embedded error estimate rounds to zero and steps stall
        throw ParameterOutOfRange("integrator tolerance must be at least 1e-15");
    }
    Trajectory traj;
    traj.tol = opt.tol;
    traj.L = sys.L();
    traj.I0 = sys.first_integral(init.x, init.theta);
    traj.states.push_back(init);
    traj.I_vals.push_back(traj.I0);

    double t = init.t;
    Vec3 y{init.x, init.y, init.theta};
    Vec3 k1 = geodesic_rhs(sys, y);
    traj.rhs_evals = 1;

    const bool by_time = stop.kind == StopCondition::Kind::TimeSpan;
    const double t_end = by_time ? init.t + stop.span : init.t + opt.max_time;
    const double theta_target = init.theta + stop.span;

    double h = opt.h_init;
    if (!(h > 0.0)) {
        const double speed = std::max({1.0, std::abs(k1[1]), std::abs(k1[2])});
        h = 0.01 / speed;
    }

    auto check_monotone = [&](const Vec3& k) {
        if (opt.require_theta_increasing && !(k[2] > 0.0)) {
            throw SectionConditionViolated("theta stopped increasing along the trajectory");
        }
    };
    check_monotone(k1);

    auto push = [&](const detail::DopriStep& st, double t_new) {
        traj.segments.push_back(st.dense);
        traj.states.push_back({t_new, st.y1[0], st.y1[1], st.y1[2]});
        traj.I_vals.push_back(sys.first_integral(st.y1[0], st.y1[2]));
    };

    while (true) {
        if (traj.accepted + traj.rejected >= opt.max_steps) {
            throw NoConvergence("integrate_geodesic: step budget exhausted");
        }
        bool last = false;
        if (t + h >= t_end) {
            h = t_end - t;
            last = true;
        }
        if (h < opt.h_min) {
            if (last && h > 0.0) {
                // remaining sliver below the floor: take it anyway
            } else {
                throw StepUnderflow("integrate_geodesic: step " + std::to_string(h) + " below floor");
            }
        }
        detail::DopriStep st = detail::dopri_step(sys, t, y, k1, h, opt.tol);
        traj.rhs_evals += 6;
        if (!(st.err <= 1.0) || !std::isfinite(st.err)) {
            ++traj.rejected;
            const double fac = std::isfinite(st.err) ? std::max(0.2, 0.9 * std::pow(st.err, -0.2)) : 0.2;
            h *= fac;
            continue;
        }
        ++traj.accepted;
        check_monotone(st.k7);

        if (!by_time && st.y1[2] >= theta_target && y[2] < theta_target) {
            // Secant (Illinois) on the dense polynomial for the crossing.
            double lo = 0.0, hi = 1.0;
            double f_lo = y[2] - theta_target;
            double f_hi = st.y1[2] - theta_target;
            int side = 0;
            for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
                const double s = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
                const double fs = st.dense.eval(t + s * h)[2] - theta_target;
                if (fs == 0.0) {
                    lo = hi = s;
                    break;
                }
                if ((fs < 0.0) == (f_lo < 0.0)) {
                    lo = s;
                    f_lo = fs;
                    if (side == -1) f_hi *= 0.5;
                    side = -1;
                } else {
                    hi = s;
                    f_hi = fs;
                    if (side == 1) f_lo *= 0.5;
                    side = 1;
                }
            }
            double h_event = 0.5 * (lo + hi) * h;
            detail::DopriStep ev = detail::dopri_step(sys, t, y, k1, h_event, opt.tol);
            for (int it = 0; it < 3; ++it) {
                const double r = ev.y1[2] - theta_target;
                if (r == 0.0) break;
                h_event -= r / ev.k7[2];
                ev = detail::dopri_step(sys, t, y, k1, h_event, opt.tol);
                traj.rhs_evals += 6;
            }
            push(ev, t + h_event);
            break;
        }

        t += h;
        y = st.y1;
        k1 = st.k7;
        push(st, t);
        if (last) {
            if (!by_time) {
                throw NoConvergence("integrate_geodesic: theta target not reached before max_time");
            }
            break;
        }
        const double fac = (st.err == 0.0) ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(st.err, -0.2)));
        h *= fac;
    }
    return traj;
}

/// Largest |I - I0| over the samples of a trajectory.
inline double first_integral_drift(const Trajectory& traj)
{
    double drift = 0.0;
    for (double I : traj.I_vals) drift = std::max(drift, std::abs(I - traj.I0));
    return drift;
}

/// Euclidean distance from (dx, dy) to the lattice Z x LZ.
inline double lattice_distance(double dx, double dy, double L)
{
    return std::hypot(dx - std::round(dx), dy - L * std::round(dy / L));
}

struct ReturnMapResult {
    double I_return = 0.0;
    double y_shift = 0.0;
    double x_return = 0.0;
    double time = 0.0;
};

/// First return to the section {theta = theta0}: starts at (x(I, theta0), 0, theta0)
/// and integrates until theta = theta0 + 2 pi.
inline ReturnMapResult return_map(const FirstIntegralChart& chart, double theta0, double I,
                                  IntegratorOptions opt = {})
{
    opt.require_theta_increasing = true;
    const double x0 = solve_x(chart, I, theta0);
    const Trajectory traj = integrate_geodesic(chart.system(), {0.0, x0, 0.0, theta0}, StopCondition::theta(two_pi), opt);
    const GeodesicState& end = traj.back();
    return {chart.system().first_integral(end.x, end.theta), end.y - traj.front().y, end.x, end.t};
}

inline ReturnMapResult return_map(const MagneticSystem& sys, double theta0, double I, const IntegratorOptions& opt = {})
{
    return return_map(FirstIntegralChart(sys), theta0, I, opt);
}

/// Magnetic length l(gamma) = length - int B(x) dy along a closed trajectory.
///
/// The line integral is resampled from dense output at `samples` uniform
/// times and summed with the periodic trapezoid rule. Throws NotClosed when
/// the end point is farther than closure_tol from the start (no lattice
/// reduction: the curve must be contractible).
inline double compute_action(const MagneticSystem& sys, const Trajectory& traj, double closure_tol = 1e-6,
                             std::size_t samples = 4096)
{
    const GeodesicState& a = traj.front();
    const GeodesicState& b = traj.back();
    const double gap = std::hypot(b.x - a.x, b.y - a.y);
    if (gap > closure_tol) {
        throw NotClosed("compute_action: trajectory misses its start by " + std::to_string(gap));
    }
    const double T = traj.duration();
    const double dt = T / static_cast<double>(samples);
    double flux = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const GeodesicState s = traj.at(a.t + dt * static_cast<double>(k));
        flux += sys.lift(s.x) * std::sin(s.theta) / sys.a()(s.x);
    }
    return T - flux * dt;
}

struct ClosureReport {
    double I = 0.0;
    double defect = 0.0;  ///< distance of the theta-period displacement to the lattice
    double dx = 0.0;
    double dy = 0.0;
    double theta_period_time = 0.0;
    bool passed = false;
};

/// Integrates one theta period from (x(I, theta0), 0, theta0) and measures the
/// displacement modulo the lattice Z x LZ.
inline ClosureReport closure_defect(const FirstIntegralChart& chart, double I, const IntegratorOptions& opt = {},
                                    double pass_tol = 1e-6, double theta0 = 0.0)
{
    const ReturnMapResult r = return_map(chart, theta0, I, opt);
    const double x0 = solve_x(chart, I, theta0);
    ClosureReport rep;
    rep.I = I;
    rep.dx = r.x_return - x0;
    rep.dy = r.y_shift;
    rep.defect = lattice_distance(rep.dx, rep.dy, chart.system().L());
    rep.theta_period_time = r.time;
    rep.passed = rep.defect < pass_tol;
    return rep;
}

} // namespace magzoll
