#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"

namespace magzoll {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Truncated trigonometric series on period 1:
///   f(x) = c0 + sum_k ( cos_k cos(2 pi k x) + sin_k sin(2 pi k x) ),  k = 1..K.
struct TrigSeries {
    double c0 = 0.0;
    std::vector<double> cos_coeffs;  // index k-1 holds harmonic k
    std::vector<double> sin_coeffs;

    std::size_t order() const { return std::max(cos_coeffs.size(), sin_coeffs.size()); }
    double cos_at(std::size_t k) const { return k >= 1 && k <= cos_coeffs.size() ? cos_coeffs[k - 1] : 0.0; }
    double sin_at(std::size_t k) const { return k >= 1 && k <= sin_coeffs.size() ? sin_coeffs[k - 1] : 0.0; }

    bool is_constant() const
    {
        auto zero = [](double c) { return c == 0.0; };
        return std::all_of(cos_coeffs.begin(), cos_coeffs.end(), zero) &&
               std::all_of(sin_coeffs.begin(), sin_coeffs.end(), zero);
    }

    /// Lower bound c0 - sum |coeffs|.
    double lower_bound() const
    {
        double s = c0;
        for (double c : cos_coeffs) s -= std::abs(c);
        for (double c : sin_coeffs) s -= std::abs(c);
        return s;
    }

    /// Value and first two derivatives in one pass.
    struct Jet {
        double value = 0.0;
        double d1 = 0.0;
        double d2 = 0.0;
    };

    Jet jet(double x) const
    {
        Jet j{c0, 0.0, 0.0};
        const std::size_t K = order();
        if (K == 0) {
            return j;
        }
        const double c1 = std::cos(two_pi * x);
        const double s1 = std::sin(two_pi * x);
        double c = c1;
        double s = s1;
        for (std::size_t k = 1; k <= K; ++k) {
            const double w = two_pi * static_cast<double>(k);
            const double ak = cos_at(k);
            const double bk = sin_at(k);
            const double even = ak * c + bk * s;
            j.value += even;
            j.d1 += w * (bk * c - ak * s);
            j.d2 -= w * w * even;
            // angle addition for harmonic k+1
            const double cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
        return j;
    }

    double eval(double x, int n = 0) const
    {
        const Jet j = jet(x);
        return n == 0 ? j.value : (n == 1 ? j.d1 : j.d2);
    }

    TrigSeries scaled(double factor) const
    {
        TrigSeries r = *this;
        r.c0 *= factor;
        for (double& c : r.cos_coeffs) c *= factor;
        for (double& c : r.sin_coeffs) c *= factor;
        return r;
    }

    /// Exact product of two series (order adds).
    friend TrigSeries operator*(const TrigSeries& p, const TrigSeries& q)
    {
        const std::size_t P = p.order();
        const std::size_t Q = q.order();
        // Work with complex-free real identities:
        //   cos A cos B = (cos(A-B) + cos(A+B))/2, etc.
        TrigSeries r;
        r.cos_coeffs.assign(P + Q, 0.0);
        r.sin_coeffs.assign(P + Q, 0.0);
        auto add = [&r](long k, double cc, double ss) {
            // contributes cc cos(2 pi k x) + ss sin(2 pi k x), k may be negative
            if (k == 0) {
                r.c0 += cc;
            } else if (k > 0) {
                r.cos_coeffs[static_cast<std::size_t>(k - 1)] += cc;
                r.sin_coeffs[static_cast<std::size_t>(k - 1)] += ss;
            } else {
                r.cos_coeffs[static_cast<std::size_t>(-k - 1)] += cc;
                r.sin_coeffs[static_cast<std::size_t>(-k - 1)] -= ss;
            }
        };
        for (std::size_t i = 0; i <= P; ++i) {
            const double pa = (i == 0) ? p.c0 : p.cos_at(i);
            const double pb = (i == 0) ? 0.0 : p.sin_at(i);
            for (std::size_t j = 0; j <= Q; ++j) {
                const double qa = (j == 0) ? q.c0 : q.cos_at(j);
                const double qb = (j == 0) ? 0.0 : q.sin_at(j);
                const long d = static_cast<long>(i) - static_cast<long>(j);
                const long s = static_cast<long>(i + j);
                if (i == 0 || j == 0) {
                    // One factor is the constant term; avoid double counting via the identities.
                    if (i == 0 && j == 0) {
                        r.c0 += pa * qa;
                    } else if (i == 0) {
                        add(s, pa * qa, pa * qb);
                    } else {
                        add(s, pa * qa, pb * qa);
                    }
                    continue;
                }
                // (pa cosA + pb sinA)(qa cosB + qb sinB)
                add(d, 0.5 * (pa * qa + pb * qb), 0.5 * (pb * qa - pa * qb));
                add(s, 0.5 * (pa * qa - pb * qb), 0.5 * (pb * qa + pa * qb));
            }
        }
        return r;
    }
};

/// Smooth 1-periodic real function with derivatives up to second order.
///
/// Either a TrigSeries (exact derivatives and antiderivatives) or an opaque
/// handle triple for functions that are not finite series.
class PeriodicFunction {
public:
    using Handle = std::function<double(double)>;

    struct Handles {
        Handle value;
        Handle d1;
        Handle d2;
    };

    PeriodicFunction() : rep_(TrigSeries{}) {}
    PeriodicFunction(TrigSeries series) : rep_(std::move(series)) {}
    PeriodicFunction(Handles handles) : rep_(std::move(handles)) {}

    static PeriodicFunction constant(double c) { return TrigSeries{c, {}, {}}; }

    /// c0 + amplitude * cos(2 pi k (x - phase)).
    static PeriodicFunction cosine(double c0, double amplitude, std::size_t k, double phase = 0.0)
    {
        TrigSeries s;
        s.c0 = c0;
        s.cos_coeffs.assign(k, 0.0);
        s.sin_coeffs.assign(k, 0.0);
        s.cos_coeffs[k - 1] = amplitude * std::cos(two_pi * static_cast<double>(k) * phase);
        s.sin_coeffs[k - 1] = amplitude * std::sin(two_pi * static_cast<double>(k) * phase);
        return s;
    }

    double operator()(double x) const { return eval(x, 0); }
    double derivative(double x) const { return eval(x, 1); }
    double second_derivative(double x) const { return eval(x, 2); }

    bool is_series() const { return std::holds_alternative<TrigSeries>(rep_); }
    const TrigSeries& series() const { return std::get<TrigSeries>(rep_); }
    bool is_constant() const { return is_series() && series().is_constant(); }

    PeriodicFunction scaled(double factor) const
    {
        if (is_series()) {
            return series().scaled(factor);
        }
        const auto& h = std::get<Handles>(rep_);
        auto wrap = [factor](Handle f) -> Handle {
            if (!f) return {};
            return [factor, f = std::move(f)](double x) { return factor * f(x); };
        };
        return Handles{wrap(h.value), wrap(h.d1), wrap(h.d2)};
    }

private:
    double eval(double x, int n) const
    {
        if (const auto* s = std::get_if<TrigSeries>(&rep_)) {
            return s->eval(x, n);
        }
        const auto& h = std::get<Handles>(rep_);
        const Handle& f = (n == 0) ? h.value : (n == 1) ? h.d1 : h.d2;
        if (!f) {
            throw Error("PeriodicFunction: derivative handle of order " + std::to_string(n) + " not provided");
        }
        return f(x);
    }

    std::variant<TrigSeries, Handles> rep_;
};

} // namespace magzoll
