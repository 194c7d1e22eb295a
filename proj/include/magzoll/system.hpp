#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "error.hpp"
#include "periodic.hpp"
#include "quadrature.hpp"
#include "roots.hpp"

namespace magzoll {

/// Lifted potential B : R -> R with B(0) = 0, B' = a b and B(x + 1) = B(x) + <b>.
using LiftFunction = std::function<double(double)>;

/// Rotationally symmetric magnetic system on R^2 / (Z x LZ):
///   g = dx^2 + a(x)^2 dy^2,  b = b(x),  with  int_0^1 a = 1.
///
/// Immutable after construction. Build it with make_system().
class MagneticSystem {
public:
    const PeriodicFunction& a() const { return a_; }
    const PeriodicFunction& b() const { return b_; }
    double L() const { return L_; }
    double b_avg() const { return b_avg_; }

    double lift(double x) const { return lift_(x); }

    /// a == 1 identically (only detectable for series representations).
    bool flat() const
    {
        return a_.is_series() && a_.series().is_constant() && a_.series().c0 == 1.0;
    }

    /// a(x) sin(theta) - B(x), lifted to R.
    double first_integral(double x, double theta) const { return a_(x) * std::sin(theta) - lift(x); }

private:
    friend MagneticSystem make_system(const PeriodicFunction&, const PeriodicFunction&, double);
    friend MagneticSystem make_system_with_lift(const PeriodicFunction&, const PeriodicFunction&, double,
                                                LiftFunction);

    MagneticSystem(PeriodicFunction a, PeriodicFunction b, double L, LiftFunction lift)
        : a_(std::move(a)), b_(std::move(b)), L_(L), lift_(std::move(lift))
    {
        b_avg_ = lift_(1.0);
    }

    PeriodicFunction a_;
    PeriodicFunction b_;
    double L_ = 1.0;
    double b_avg_ = 0.0;
    LiftFunction lift_;
};

namespace detail {

/// Antiderivative of a series vanishing at 0: c0 x + periodic part.
inline LiftFunction series_lift(const TrigSeries& ab)
{
    TrigSeries periodic;
    periodic.c0 = 0.0;
    const std::size_t K = ab.order();
    periodic.cos_coeffs.assign(K, 0.0);
    periodic.sin_coeffs.assign(K, 0.0);
    for (std::size_t k = 1; k <= K; ++k) {
        const double w = two_pi * static_cast<double>(k);
        periodic.cos_coeffs[k - 1] = -ab.sin_at(k) / w;
        periodic.sin_coeffs[k - 1] = ab.cos_at(k) / w;
    }
    const double offset = periodic.eval(0.0);
    return [slope = ab.c0, periodic = std::move(periodic), offset](double x) {
        return slope * x + periodic.eval(x) - offset;
    };
}

/// Antiderivative of a general periodic integrand from cached panel sums.
inline LiftFunction panel_lift(std::function<double(double)> integrand, int panels = 256, int nodes = 16)
{
    auto cumulative = std::make_shared<std::vector<double>>(static_cast<std::size_t>(panels) + 1, 0.0);
    const double width = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = p * width;
        (*cumulative)[static_cast<std::size_t>(p) + 1] =
            (*cumulative)[static_cast<std::size_t>(p)] +
            integrate(integrand, lo, lo + width, QuadratureRule::gauss(1, nodes)).value;
    }
    const double period_integral = cumulative->back();
    return [cumulative, integrand = std::move(integrand), panels, width, nodes, period_integral](double x) {
        const double whole = std::floor(x);
        const double frac = x - whole;
        int p = std::min(static_cast<int>(frac * panels), panels - 1);
        const double lo = p * width;
        double value = whole * period_integral + (*cumulative)[static_cast<std::size_t>(p)];
        if (frac > lo) {
            value += integrate(integrand, whole + lo, x, QuadratureRule::gauss(1, nodes)).value;
        }
        return value;
    };
}

/// Minimum of fn over [0, 1): uniform grid plus golden-section refinement
/// around the `refine` smallest grid values.
template <class Fn>
double periodic_min(Fn&& fn, int grid = 4096, int refine = 8)
{
    std::vector<double> values(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        values[static_cast<std::size_t>(i)] = fn(static_cast<double>(i) / grid);
    }
    std::vector<int> order(static_cast<std::size_t>(grid));
    std::iota(order.begin(), order.end(), 0);
    const int count = std::min(refine, grid);
    std::partial_sort(order.begin(), order.begin() + count, order.end(),
                      [&values](int l, int r) { return values[static_cast<std::size_t>(l)] < values[static_cast<std::size_t>(r)]; });
    double best = values[static_cast<std::size_t>(order[0])];
    const double h = 1.0 / grid;
    for (int i = 0; i < count; ++i) {
        const double x = static_cast<double>(order[static_cast<std::size_t>(i)]) * h;
        best = std::min(best, roots::golden_section_min(fn, x - h, x + h, 1e-13).value);
    }
    return best;
}

inline void check_positive_warping(const PeriodicFunction& a)
{
    if (a.is_series() && a.series().lower_bound() > 0.0) {
        return;
    }
    const double min_a = periodic_min([&a](double x) { return a(x); });
    if (!(min_a > 0.0)) {
        throw NonPositiveWarping("warping function a has minimum " + std::to_string(min_a) + " <= 0");
    }
}

inline void check_average(double b_avg)
{
    if (b_avg < 0.0) {
        throw NegativeAverage("average of b is " + std::to_string(b_avg) +
                              " < 0; reverse the orientation and the sign of b");
    }
}

} // namespace detail

/// Builds a normalized system from arbitrary positive a.
///
/// a is rescaled by c = int_0^1 a and L by c so that int_0^1 a = 1; the lift
/// B is the exact series antiderivative when both a and b are series and a
/// panel-cached quadrature otherwise.
inline MagneticSystem make_system(const PeriodicFunction& a_spec, const PeriodicFunction& b_spec, double L)
{
    if (!(L > 0.0)) {
        throw ParameterOutOfRange("lattice height L must be positive");
    }
    detail::check_positive_warping(a_spec);
    const double c = a_spec.is_series()
                         ? a_spec.series().c0
                         : integrate([&a_spec](double x) { return a_spec(x); }, 0.0, 1.0).value;
    PeriodicFunction a = a_spec.scaled(1.0 / c);
    if (a.is_series()) {
        // normalization is exact in the constant coefficient
        TrigSeries s = a.series();
        s.c0 = 1.0;
        a = s;
    }
    LiftFunction lift;
    if (a.is_series() && b_spec.is_series()) {
        lift = detail::series_lift(a.series() * b_spec.series());
    } else {
        lift = detail::panel_lift([a, b_spec](double x) { return a(x) * b_spec(x); });
    }
    MagneticSystem sys(std::move(a), b_spec, c * L, std::move(lift));
    detail::check_average(sys.b_avg());
    return sys;
}

/// Builds a system whose lift is known in closed form. `a` must already be
/// normalized; the caller guarantees lift(0) = 0 and lift' = a b.
inline MagneticSystem make_system_with_lift(const PeriodicFunction& a, const PeriodicFunction& b, double L,
                                            LiftFunction lift)
{
    if (!(L > 0.0)) {
        throw ParameterOutOfRange("lattice height L must be positive");
    }
    detail::check_positive_warping(a);
    MagneticSystem sys(a, b, L, std::move(lift));
    detail::check_average(sys.b_avg());
    return sys;
}

/// min over x of a b - |a'|. Positive iff the tori {theta = const} are global
/// surfaces of section (equivalently Crit I is empty).
///
/// Grid: 4096 uniform points, golden-section refinement around the 8 smallest.
inline double section_condition_margin(const MagneticSystem& sys)
{
    return detail::periodic_min([&sys](double x) {
        return sys.a()(x) * sys.b()(x) - std::abs(sys.a().derivative(x));
    });
}

/// Partial derivative of the first integral in x: a'(x) sin(theta) - a(x) b(x).
inline double dI_dx(const MagneticSystem& sys, double x, double theta)
{
    return sys.a().derivative(x) * std::sin(theta) - sys.a()(x) * sys.b()(x);
}

struct CurvatureSample {
    double x = 0.0;
    double theta = 0.0;
    double K = 0.0;
};

/// Magnetic curvature b^2 + b' sin(theta) - a''/a.
inline CurvatureSample magnetic_curvature(const MagneticSystem& sys, double x, double theta)
{
    const double bx = sys.b()(x);
    const double K = bx * bx + sys.b().derivative(x) * std::sin(theta) - sys.a().second_derivative(x) / sys.a()(x);
    return {x, theta, K};
}

} // namespace magzoll
