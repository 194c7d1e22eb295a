#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "error.hpp"

namespace magzoll::roots {

/// Interval [lo, hi] on which fn changes sign.
struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    double f_lo = 0.0;
    double f_hi = 0.0;

    double half_width() const { return 0.5 * (hi - lo); }
    double mid() const { return 0.5 * (lo + hi); }
};

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

inline bool opposite_signs(double a, double b) { return (a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0); }

/// Grows a bracket around x0 for a function whose sign eventually changes in
/// both directions (e.g. a strictly monotone function onto R). Steps double
/// each time the sign has not changed yet.
template <class Fn>
Bracket expand_bracket(Fn&& fn, double x0, double step, int max_expansions = 200)
{
    double lo = x0 - step;
    double hi = x0 + step;
    double f_lo = fn(lo);
    double f_hi = fn(hi);
    for (int i = 0; i < max_expansions; ++i) {
        if (opposite_signs(f_lo, f_hi)) {
            return {lo, hi, f_lo, f_hi};
        }
        // Move the endpoint with smaller |f| outward; for monotone fn that is the
        // side where the root lies.
        step *= 2.0;
        if (std::abs(f_lo) < std::abs(f_hi)) {
            lo -= step;
            f_lo = fn(lo);
        } else {
            hi += step;
            f_hi = fn(hi);
        }
    }
    throw NoConvergence("expand_bracket: no sign change found");
}

/// Plain bisection until the bracket half-width is at most half_width.
template <class Fn>
Bracket bisect(Fn&& fn, Bracket b, double half_width, int max_iter = 200)
{
    if (!opposite_signs(b.f_lo, b.f_hi)) {
        throw NoConvergence("bisect: interval does not bracket a sign change");
    }
    for (int it = 0; it < max_iter && b.half_width() > half_width; ++it) {
        const double m = b.mid();
        if (m <= b.lo || m >= b.hi) {
            break;  // interval exhausted at double resolution
        }
        const double fm = fn(m);
        if (fm == 0.0) {
            return {m, m, 0.0, 0.0};
        }
        if (opposite_signs(b.f_lo, fm)) {
            b.hi = m;
            b.f_hi = fm;
        } else {
            b.lo = m;
            b.f_lo = fm;
        }
    }
    if (b.half_width() > half_width && b.hi - b.lo > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b.mid())) {
        throw NoConvergence("bisect: iteration limit reached");
    }
    return b;
}

/// Newton iteration kept inside a sign-change bracket; falls back to bisection
/// whenever the Newton step leaves the bracket or stalls.
///
/// fdf(x) returns the pair (f(x), f'(x)). Stops when |f| <= ftol or the
/// bracket has shrunk below xtol.
template <class FdF>
RootResult safeguarded_newton(FdF&& fdf, Bracket b, double x0, double ftol, double xtol = 0.0, int max_iter = 100)
{
    if (!opposite_signs(b.f_lo, b.f_hi)) {
        throw NoConvergence("safeguarded_newton: interval does not bracket a sign change");
    }
    const bool increasing = b.f_lo < b.f_hi;
    double x = (x0 > b.lo && x0 < b.hi) ? x0 : b.mid();
    double best_x = x;
    double best_f = std::numeric_limits<double>::infinity();
    double prev_step = b.hi - b.lo;
    for (int it = 1; it <= max_iter; ++it) {
        const auto [f, df] = fdf(x);
        if (std::abs(f) < std::abs(best_f)) {
            best_f = f;
            best_x = x;
        }
        if (std::abs(f) <= ftol) {
            return {x, std::abs(f), it};
        }
        if ((f < 0.0) == increasing) {
            b.lo = x;
            b.f_lo = f;
        } else {
            b.hi = x;
            b.f_hi = f;
        }
        if (b.hi - b.lo <= xtol) {
            return {best_x, std::abs(best_f), it};
        }
        double next = x - f / df;
        const bool outside = !(next > b.lo && next < b.hi) || !std::isfinite(next);
        if (outside || std::abs(next - x) > 0.5 * prev_step) {
            next = b.mid();
        }
        prev_step = std::abs(next - x);
        if (next == x) {
            return {best_x, std::abs(best_f), it};
        }
        x = next;
    }
    throw NoConvergence("safeguarded_newton: no convergence, best residual " + std::to_string(std::abs(best_f)));
}

/// Brent's method on a bracket. Returns once the bracket is below xtol.
template <class Fn>
RootResult brent(Fn&& fn, Bracket br, double xtol, int max_iter = 200)
{
    double a = br.lo, b = br.hi, fa = br.f_lo, fb = br.f_hi;
    if (!opposite_signs(fa, fb)) {
        throw NoConvergence("brent: interval does not bracket a sign change");
    }
    if (fa == 0.0) return {a, 0.0, 0};
    if (fb == 0.0) return {b, 0.0, 0};
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 1; it <= max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) {
            return {b, std::abs(fb), it};
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = fn(b);
    }
    throw NoConvergence("brent: iteration limit reached");
}

struct Minimum {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section search for a local minimum of fn on [lo, hi].
template <class Fn>
Minimum golden_section_min(Fn&& fn, double lo, double hi, double xtol = 1e-12, int max_iter = 200)
{
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = fn(x1);
    double f2 = fn(x2);
    for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = fn(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = fn(x2);
        }
    }
    return f1 <= f2 ? Minimum{x1, f1} : Minimum{x2, f2};
}

} // namespace magzoll::roots
