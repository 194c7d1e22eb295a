#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "bessel.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "roots.hpp"
#include "system.hpp"

namespace magzoll {

/// Gauss rule in theta. With refine set, the chart doubles the panel count
/// until S and Delta at probe levels agree with the half-panel rule to tol.
struct ThetaRule {
    int panels = 64;
    int nodes = 16;
    bool refine = true;
    int max_panels = 1024;
    double tol = 1e-9;
};

/// Coordinates (I, theta) on the unit tangent bundle of a system satisfying
/// |a'| < ab. I is kept as a lift in R throughout.
class FirstIntegralChart {
public:
    explicit FirstIntegralChart(MagneticSystem sys, ThetaRule rule = {})
        : sys_(std::move(sys)),
          margin_(section_condition_margin(sys_)),
          fine_(0.0, two_pi, rule.panels, rule.nodes),
          coarse_(0.0, two_pi, std::max(1, rule.panels / 2), rule.nodes),
          panels_(rule.panels)
    {
        if (rule.panels < 1 || rule.nodes < 1 || rule.nodes > 64) {
            throw ParameterOutOfRange("theta rule needs panels >= 1 and 1 <= nodes <= 64");
        }
        if (!(margin_ > 0.0)) {
            throw SectionConditionViolated("section condition |a'| < ab fails (margin " + std::to_string(margin_) +
                                           ")");
        }
        if (rule.refine) refine_theta_rule(rule);
    }

    const MagneticSystem& system() const { return sys_; }
    double margin() const { return margin_; }
    double period() const { return sys_.b_avg(); }
    const CompositeGauss& theta_rule() const { return fine_; }
    const CompositeGauss& coarse_theta_rule() const { return coarse_; }
    int theta_panels() const { return panels_; }

private:
    void refine_theta_rule(const ThetaRule& rule);

    MagneticSystem sys_;
    double margin_;
    CompositeGauss fine_;
    CompositeGauss coarse_;
    int panels_ = 0;
};

/// Unique lifted x with a(x) sin(theta) - B(x) = I.
///
/// x -> I(x, theta) is strictly decreasing and I(x + 1) = I(x) - <b>, so a unit
/// bracket follows from one evaluation; safeguarded Newton then uses dI/dx.
inline double solve_x(const FirstIntegralChart& chart, double I, double theta)
{
    const MagneticSystem& sys = chart.system();
    const double s = std::sin(theta);
    const double period = sys.b_avg();
    auto f = [&](double x) { return sys.a()(x) * s - sys.lift(x) - I; };
    auto fdf = [&](double x) {
        const auto aj = sys.a().is_series() ? sys.a().series().jet(x) : TrigSeries::Jet{sys.a()(x), sys.a().derivative(x), 0.0};
        const double value = aj.value * s - sys.lift(x) - I;
        return std::pair{value, aj.d1 * s - aj.value * sys.b()(x)};
    };
    const double x0 = (s - I) / period;
    const double f0 = f(x0);
    roots::Bracket br;
    if (f0 == 0.0) {
        return x0;
    }
    if (f0 > 0.0) {
        const double k = std::ceil(f0 / period);
        br.lo = x0 + k - 1.0;
        br.hi = x0 + k;
    } else {
        const double k = std::ceil(-f0 / period);
        br.lo = x0 - k;
        br.hi = x0 - k + 1.0;
    }
    br.f_lo = f(br.lo);
    br.f_hi = f(br.hi);
    if (!roots::opposite_signs(br.f_lo, br.f_hi)) {
        // rounding in the lift at the bracket ends; widen once
        br = roots::expand_bracket(f, br.mid(), 1.0);
    }
    const double scale = 1.0 + std::abs(I);
    const auto root = roots::safeguarded_newton(fdf, br, x0, 1e-15 * scale, 0.0, 200);
    if (root.residual > 1e-12 * scale) {
        throw NoConvergence("solve_x: residual " + std::to_string(root.residual) + " at I=" + std::to_string(I));
    }
    return root.x;
}

/// dx/dI = 1 / (dI/dx); negative under the section condition.
inline double dx_dI(const FirstIntegralChart& chart, double I, double theta)
{
    return 1.0 / dI_dx(chart.system(), solve_x(chart, I, theta), theta);
}

/// S and Delta at one level, with error estimates from halving the panels.
struct LevelIntegrals {
    double S = 0.0;
    double Delta = 0.0;
    double S_err = 0.0;
    double Delta_err = 0.0;
};

namespace detail {

/// Returns (S, Delta) for the given rule.
inline std::pair<double, double> theta_integrals(const FirstIntegralChart& chart, const CompositeGauss& rule, double I)
{
    const MagneticSystem& sys = chart.system();
    double S = 0.0;
    double D = 0.0;
    const auto& pts = rule.points();
    const auto& wts = rule.weights();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double theta = pts[i];
        const double x = solve_x(chart, I, theta);
        const double st = std::sin(theta);
        const double ct = std::cos(theta);
        const double ax = sys.a()(x);
        const double dxdI = 1.0 / (sys.a().derivative(x) * st - ax * sys.b()(x));
        S -= wts[i] * ax * ct * ct * dxdI;
        D -= wts[i] * st * dxdI;
    }
    return {S, D};
}

} // namespace detail

inline void FirstIntegralChart::refine_theta_rule(const ThetaRule& rule)
{
    constexpr int probes = 16;
    while (panels_ < rule.max_panels) {
        double worst = 0.0;
        for (int k = 0; k < probes; ++k) {
            const double I = period() * (k + 0.5) / probes;
            const auto [S, D] = detail::theta_integrals(*this, fine_, I);
            const auto [Sc, Dc] = detail::theta_integrals(*this, coarse_, I);
            worst = std::max({worst, std::abs(S - Sc) / (1.0 + std::abs(S)), std::abs(D - Dc) / (1.0 + std::abs(S))});
        }
        if (worst < rule.tol) return;
        panels_ *= 2;
        coarse_ = std::move(fine_);
        fine_ = CompositeGauss(0.0, two_pi, panels_, rule.nodes);
    }
}

inline LevelIntegrals level_integrals(const FirstIntegralChart& chart, double I)
{
    const auto [S, D] = detail::theta_integrals(chart, chart.theta_rule(), I);
    const auto [Sc, Dc] = detail::theta_integrals(chart, chart.coarse_theta_rule(), I);
    return {S, D, std::abs(S - Sc), std::abs(D - Dc)};
}

/// Return-map shift Delta(I) = -int sin(theta) dx/dI dtheta.
inline double delta(const FirstIntegralChart& chart, double I)
{
    return detail::theta_integrals(chart, chart.theta_rule(), I).second;
}

/// Action S(I) = -int a(x) cos^2(theta) dx/dI dtheta.
inline double action_S(const FirstIntegralChart& chart, double I)
{
    return detail::theta_integrals(chart, chart.theta_rule(), I).first;
}

/// S and Delta sampled on I_k = I0 + k <b> / n, k < n.
struct ActionProfile {
    double period = 0.0;
    std::vector<double> I_grid;
    std::vector<double> S_vals;
    std::vector<double> Delta_vals;
    std::vector<double> err_est;

    std::size_t size() const { return I_grid.size(); }

    /// int_0^<b> S dI by the periodic trapezoid rule, summed in index order.
    double integral_S() const
    {
        double sum = 0.0;
        for (double s : S_vals) sum += s;
        return sum * period / static_cast<double>(S_vals.size());
    }

    double min_S() const { return *std::min_element(S_vals.begin(), S_vals.end()); }
    double max_S() const { return *std::max_element(S_vals.begin(), S_vals.end()); }
};

inline ActionProfile action_profile(const FirstIntegralChart& chart, std::size_t n = 512, double I0 = 0.0)
{
    ActionProfile p;
    p.period = chart.period();
    const double h = p.period / static_cast<double>(n);
    p.I_grid.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        p.I_grid[k] = I0 + h * static_cast<double>(k);
    }
    const auto levels =
        parallel_map<LevelIntegrals>(n, [&](std::size_t k) { return level_integrals(chart, p.I_grid[k]); });
    p.S_vals.resize(n);
    p.Delta_vals.resize(n);
    p.err_est.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        p.S_vals[k] = levels[k].S;
        p.Delta_vals[k] = levels[k].Delta;
        p.err_est[k] = std::max(levels[k].S_err, levels[k].Delta_err);
    }
    return p;
}

/// int_0^<b> S dI by the periodic trapezoid rule, doubling the level count
/// until two successive sums agree to tol.
struct ActionIntegral {
    double value = 0.0;
    double err_est = 0.0;
    std::size_t levels = 0;
};

inline ActionIntegral action_integral(const FirstIntegralChart& chart, double tol = 1e-10, std::size_t n0 = 128,
                                      std::size_t n_max = 8192)
{
    const double period = chart.period();
    std::size_t n = std::max<std::size_t>(n0, 2);
    double h = period / static_cast<double>(n);
    auto sum_at = [&](double offset, std::size_t count) {
        const auto vals = parallel_map<double>(
            count, [&](std::size_t k) { return action_S(chart, offset + h * static_cast<double>(k)); });
        double sum = 0.0;
        for (double v : vals) sum += v;
        return sum;
    };
    double sum = sum_at(0.0, n);
    ActionIntegral out{sum * h, std::numeric_limits<double>::infinity(), n};
    while (n < n_max) {
        sum += sum_at(0.5 * h, n);
        n *= 2;
        h *= 0.5;
        const double next = sum * h;
        out.err_est = std::abs(next - out.value);
        out.value = next;
        out.levels = n;
        if (out.err_est < tol) break;
    }
    return out;
}

/// B^{-1}(u) for a system with b > 0 (B strictly increasing).
inline double inverse_lift(const MagneticSystem& sys, double u)
{
    const double period = sys.b_avg();
    auto f = [&](double x) { return sys.lift(x) - u; };
    auto fdf = [&](double x) { return std::pair{sys.lift(x) - u, sys.a()(x) * sys.b()(x)}; };
    const double x0 = u / period;
    const double f0 = f(x0);
    if (f0 == 0.0) return x0;
    roots::Bracket br;
    if (f0 < 0.0) {
        const double k = std::ceil(-f0 / period);
        br.lo = x0 + k - 1.0;
        br.hi = x0 + k;
    } else {
        const double k = std::ceil(f0 / period);
        br.lo = x0 - k;
        br.hi = x0 - k + 1.0;
    }
    br.f_lo = f(br.lo);
    br.f_hi = f(br.hi);
    if (!roots::opposite_signs(br.f_lo, br.f_hi)) {
        br = roots::expand_bracket(f, br.mid(), 1.0);
    }
    return roots::safeguarded_newton(fdf, br, x0, 1e-15 * (1.0 + std::abs(u)), 0.0, 200).x;
}

/// f = d(B^{-1})/du = 1 / b(B^{-1}(u)) on a flat torus.
inline double flat_f(const FirstIntegralChart& chart, double u)
{
    const MagneticSystem& sys = chart.system();
    if (!sys.flat()) {
        throw FlatOnly("flat_f requires a == 1");
    }
    return 1.0 / sys.b()(inverse_lift(sys, u));
}

/// f_hat(m) = int_0^<b> f(u) exp(-2 pi i m u / <b>) du, periodic trapezoid.
inline std::complex<double> flat_f_hat(const FirstIntegralChart& chart, long m, std::size_t samples = 1024)
{
    const double period = chart.period();
    const double h = period / static_cast<double>(samples);
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t k = 0; k < samples; ++k) {
        const double u = h * static_cast<double>(k);
        const double phase = -two_pi * static_cast<double>(m) * u / period;
        sum += flat_f(chart, u) * std::polar(1.0, phase);
    }
    return sum * h;
}

enum class FourierMethod { Direct, FlatClosedForm };

/// S_hat(m) = int_0^<b> S(I) exp(-2 pi i m I / <b>) dI from a sampled profile.
/// The profile must start at I = 0 and cover one period uniformly.
inline std::complex<double> S_fourier(const ActionProfile& profile, long m)
{
    const std::size_t n = profile.size();
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        const double phase = -two_pi * static_cast<double>(m) * static_cast<double>(k) / static_cast<double>(n);
        sum += profile.S_vals[k] * std::polar(1.0, phase);
    }
    return sum * (profile.period / static_cast<double>(n));
}

/// Flat-torus closed form
///   S_hat(m) = (<b> / (2 pi |m|)) J1(2 pi |m| / <b>) f_hat(-m)
/// with J1 in the bessel_j1_2pi normalization. The constant was pinned by
/// comparing against the direct quadrature (see tests).
inline std::complex<double> S_fourier_closed_form(const FirstIntegralChart& chart, long m)
{
    if (!chart.system().flat()) {
        throw FlatOnly("closed-form Fourier coefficients require a == 1");
    }
    if (m == 0) {
        throw ParameterOutOfRange("S_fourier: m must be nonzero");
    }
    const double period = chart.period();
    const double am = static_cast<double>(std::labs(m));
    const double xi = two_pi * am / period;
    return (period / (two_pi * am)) * bessel_j1_2pi(xi) * flat_f_hat(chart, -m);
}

inline std::complex<double> S_fourier(const FirstIntegralChart& chart, long m, FourierMethod method,
                                      std::size_t profile_points = 512)
{
    if (m == 0) {
        throw ParameterOutOfRange("S_fourier: m must be nonzero");
    }
    if (method == FourierMethod::FlatClosedForm) {
        return S_fourier_closed_form(chart, m);
    }
    return S_fourier(action_profile(chart, profile_points), m);
}

} // namespace magzoll
