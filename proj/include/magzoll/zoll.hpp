#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "bessel.hpp"
#include "error.hpp"
#include "flow.hpp"
#include "integrable.hpp"
#include "periodic.hpp"
#include "quadrature.hpp"
#include "roots.hpp"
#include "system.hpp"

namespace magzoll {

/// Single-harmonic density on the circle R / <b>Z:
///   f(u) = 1/<b> + s cos(2 pi m0 (u - u0) / <b>),
///   F(u) = u/<b> + (s <b> / (2 pi m0)) sin(2 pi m0 (u - u0) / <b>),   F' = f.
/// F descends to an orientation preserving diffeomorphism R/<b>Z -> R/Z for |s| < 1/<b>.
struct HarmonicDensity {
    double b_avg = 1.0;
    std::size_t m0 = 1;
    double u0 = 0.0;
    double s = 0.0;

    double wavenumber() const { return two_pi * static_cast<double>(m0) / b_avg; }

    double f(double u) const { return 1.0 / b_avg + s * std::cos(wavenumber() * (u - u0)); }
    double df(double u) const { return -s * wavenumber() * std::sin(wavenumber() * (u - u0)); }
    double d2f(double u) const { return -s * wavenumber() * wavenumber() * std::cos(wavenumber() * (u - u0)); }

    double F(double u) const { return u / b_avg + s / wavenumber() * std::sin(wavenumber() * (u - u0)); }

    /// Monotone inversion of F by safeguarded Newton; residual below 1e-13 (1 + |x|).
    double F_inverse(double x) const
    {
        const double amp = std::abs(s) / wavenumber() + 1e-12 * (1.0 + std::abs(x));
        auto fn = [this, x](double u) { return F(u) - x; };
        auto fdf = [this, x](double u) { return std::pair{F(u) - x, f(u)}; };
        roots::Bracket br{b_avg * (x - amp), b_avg * (x + amp), 0.0, 0.0};
        br.f_lo = fn(br.lo);
        br.f_hi = fn(br.hi);
        if (!roots::opposite_signs(br.f_lo, br.f_hi)) {
            br = roots::expand_bracket(fn, b_avg * x, b_avg * amp + 1e-12);
        }
        const double ftol = 1e-15 * (1.0 + std::abs(x));
        const auto root = roots::safeguarded_newton(fdf, br, b_avg * x, ftol, 0.0, 400);
        if (root.residual > 1e-13 * (1.0 + std::abs(x))) {
            throw NoConvergence("F_inverse: residual " + std::to_string(root.residual));
        }
        return root.x;
    }
};

/// One member of the flat Zoll family attached to b_con = 2 pi n / xi.
struct ZollFamily {
    std::size_t n = 1;
    std::size_t xi_index = 1;
    double xi = 0.0;
    double b_con = 0.0;
    std::size_t m0 = 1;
    double u0 = 0.0;
    double s = 0.0;            ///< requested parameter, |s| < 1/b_con
    double s_eff = 0.0;        ///< parameter used for evaluation (clamped near the endpoint)
    bool clamped = false;

    HarmonicDensity density() const { return {b_con, m0, u0, s_eff}; }
};

/// Relative distance from the excluded endpoint |s| = 1/b_con below which s is clamped.
inline constexpr double zoll_clamp_margin = 1e-6;

/// Validates and builds a family member. m0 = 0 selects the default m0 = n.
inline ZollFamily make_family(std::size_t n, std::size_t xi_index, std::size_t m0, double u0, double s,
                              const BesselZeroTable& table)
{
    if (n < 1 || xi_index < 1) {
        throw ParameterOutOfRange("make_family: n and xi_index must be >= 1");
    }
    if (xi_index > table.size()) {
        throw ParameterOutOfRange("make_family: xi_index beyond the zero table");
    }
    ZollFamily fam;
    fam.n = n;
    fam.xi_index = xi_index;
    fam.xi = table.xi(xi_index);
    fam.b_con = two_pi * static_cast<double>(n) / fam.xi;
    fam.m0 = (m0 == 0) ? n : m0;
    fam.u0 = u0;
    fam.s = s;
    if (!(std::abs(s) * fam.b_con < 1.0)) {
        throw ParameterOutOfRange("make_family: |s| must be < 1/b_con = " + std::to_string(1.0 / fam.b_con));
    }
    const double j = bessel_j1_2pi(two_pi * static_cast<double>(fam.m0) / fam.b_con);
    if (!(std::abs(j) < 1e-7)) {
        throw NotAdmissible("make_family: 2 pi m0 / b_con is not a zero of J1 (J1 = " + std::to_string(j) + ")");
    }
    const double limit = (1.0 - zoll_clamp_margin) / fam.b_con;
    fam.s_eff = std::clamp(s, -limit, limit);
    fam.clamped = fam.s_eff != s;
    return fam;
}

inline ZollFamily make_family(std::size_t n, std::size_t xi_index, std::size_t m0, double u0, double s)
{
    return make_family(n, xi_index, m0, u0, s, j1_zeros(std::max<std::size_t>(xi_index, 1)));
}

/// Flat system (a == 1) whose lift is B(x) = F^{-1}(x) - F^{-1}(0), i.e.
/// b = 1 / f(F^{-1}(x)). No admissibility check: with 2 pi m0 / b_avg away from
/// the J1 zeros this is the non-Zoll single-harmonic system.
inline MagneticSystem harmonic_system(const HarmonicDensity& dens, double L = 1.0)
{
    const double offset = dens.F_inverse(0.0);
    PeriodicFunction::Handles b;
    b.value = [dens](double x) { return 1.0 / dens.f(dens.F_inverse(x)); };
    b.d1 = [dens](double x) {
        const double u = dens.F_inverse(x);
        const double fu = dens.f(u);
        return -dens.df(u) / (fu * fu * fu);
    };
    b.d2 = [dens](double x) {
        const double u = dens.F_inverse(x);
        const double fu = dens.f(u);
        const double dfu = dens.df(u);
        return (3.0 * dfu * dfu - dens.d2f(u) * fu) / std::pow(fu, 5);
    };
    auto lift = [dens, offset](double x) { return dens.F_inverse(x) - offset; };
    return make_system_with_lift(PeriodicFunction::constant(1.0), PeriodicFunction(std::move(b)), L, lift);
}

inline MagneticSystem family_system(const ZollFamily& fam, double L = 1.0)
{
    if (fam.s_eff == 0.0) {
        return make_system(PeriodicFunction::constant(1.0), PeriodicFunction::constant(fam.b_con), L);
    }
    return harmonic_system(fam.density(), L);
}

/// Geodesic of the family with first integral I, parametrized by theta:
///   x = F(sin th - I + c),
///   y = -cos(th)/b_con + s int_{-pi/2}^{th} sin(p) cos(k (sin p - I + c - u0)) dp,
/// where c = F^{-1}(0) (zero for u0 = 0) and k = 2 pi m0 / b_con. y(-pi/2) = 0.
struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
};

inline PlanePoint closed_form_geodesic(const ZollFamily& fam, double I, double theta)
{
    const HarmonicDensity dens = fam.density();
    const double c = (fam.u0 == 0.0) ? 0.0 : dens.F_inverse(0.0);
    const double k = dens.wavenumber();
    const double x = dens.F(std::sin(theta) - I + c);
    double y = -std::cos(theta) / fam.b_con;
    if (dens.s != 0.0) {
        const double lo = -0.5 * std::numbers::pi;
        const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(theta - lo) / 0.2)));
        const double integral =
            integrate([&](double p) { return std::sin(p) * std::cos(k * (std::sin(p) - I + c - dens.u0)); }, lo,
                      theta, QuadratureRule::gauss(panels, 16))
                .value;
        y += dens.s * integral;
    }
    return {x, y};
}

/// Closed-form orbit at theta_j = theta0 + 2 pi j / samples, j = 0..samples.
/// x is evaluated pointwise; y is accumulated one 16-node Gauss panel per step,
/// starting from closed_form_geodesic at theta0.
inline std::vector<PlanePoint> closed_form_orbit(const ZollFamily& fam, double I, std::size_t samples,
                                                 double theta0 = -0.5 * std::numbers::pi)
{
    const HarmonicDensity dens = fam.density();
    const double c = (fam.u0 == 0.0) ? 0.0 : dens.F_inverse(0.0);
    const double k = dens.wavenumber();
    const double h = two_pi / static_cast<double>(samples);
    std::vector<PlanePoint> out(samples + 1);
    const PlanePoint start = closed_form_geodesic(fam, I, theta0);
    double integral = 0.0;
    const double y_base = start.y + std::cos(theta0) / fam.b_con;
    auto integrand = [&](double p) { return std::sin(p) * std::cos(k * (std::sin(p) - I + c - dens.u0)); };
    for (std::size_t j = 0; j <= samples; ++j) {
        const double theta = theta0 + h * static_cast<double>(j);
        if (j > 0 && dens.s != 0.0) {
            integral += integrate(integrand, theta - h, theta, QuadratureRule::gauss(1, 16)).value;
        }
        out[j] = {dens.F(std::sin(theta) - I + c), y_base - std::cos(theta) / fam.b_con + dens.s * integral};
    }
    return out;
}

struct ZollReport {
    double max_abs_delta = 0.0;
    double max_closure_defect = 0.0;
    double max_S_deviation = 0.0;  ///< max |S - pi/<b>|
    double tol = 0.0;
    std::size_t samples = 0;
    bool passed = false;
};

/// Aggregates |Delta|, ODE closure defect and |S - pi/<b>| over a uniform I grid.
inline ZollReport verify_zoll(const FirstIntegralChart& chart, std::size_t I_samples = 16, double tol = 1e-6,
                              const IntegratorOptions& opt = {})
{
    const double period = chart.period();
    const double bound = std::numbers::pi / period;
    struct Row {
        double delta, defect, dev;
    };
    const auto rows = parallel_map<Row>(I_samples, [&](std::size_t k) {
        const double I = period * static_cast<double>(k) / static_cast<double>(I_samples);
        const LevelIntegrals li = level_integrals(chart, I);
        const ClosureReport cr = closure_defect(chart, I, opt, tol);
        return Row{std::abs(li.Delta), cr.defect, std::abs(li.S - bound)};
    });
    ZollReport rep;
    rep.tol = tol;
    rep.samples = I_samples;
    for (const Row& r : rows) {
        rep.max_abs_delta = std::max(rep.max_abs_delta, r.delta);
        rep.max_closure_defect = std::max(rep.max_closure_defect, r.defect);
        rep.max_S_deviation = std::max(rep.max_S_deviation, r.dev);
    }
    rep.passed = rep.max_abs_delta < tol && rep.max_closure_defect < tol && rep.max_S_deviation < tol;
    return rep;
}

} // namespace magzoll
