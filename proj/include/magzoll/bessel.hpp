#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "error.hpp"
#include "periodic.hpp"
#include "quadrature.hpp"
#include "roots.hpp"

namespace magzoll {

/// J1 in the normalization
///   J1(xi) = xi * int_0^{2 pi} cos(xi sin t) cos^2 t dt,
/// which equals 2 pi times the standard Bessel function J_1. The zeros agree.
///
/// The integrand is entire and 2 pi periodic; the panel count grows with xi so
/// the oscillation stays resolved.
inline double bessel_j1_2pi(double xi)
{
    const int panels = std::max(64, static_cast<int>(std::ceil(std::abs(xi))) * 2);
    const double integral =
        integrate([xi](double t) {
            const double c = std::cos(t);
            return std::cos(xi * std::sin(t)) * c * c;
        },
                  0.0, two_pi, QuadratureRule::gauss(panels, 16))
            .value;
    return xi * integral;
}

/// Derivative of bessel_j1_2pi, by differentiating under the integral.
inline double bessel_j1_2pi_derivative(double xi)
{
    const int panels = std::max(64, static_cast<int>(std::ceil(std::abs(xi))) * 2);
    const double integral =
        integrate([xi](double t) {
            const double c = std::cos(t);
            const double s = std::sin(t);
            return (std::cos(xi * s) - xi * s * std::sin(xi * s)) * c * c;
        },
                  0.0, two_pi, QuadratureRule::gauss(panels, 16))
            .value;
    return integral;
}

struct BesselZero {
    std::size_t k = 0;
    double xi = 0.0;
    double bracket_halfwidth = 0.0;
};

/// First positive zeros of J1, each certified by a sign-change bracket.
struct BesselZeroTable {
    std::vector<BesselZero> zeros;
    double tol = 1e-12;

    std::size_t size() const { return zeros.size(); }
    /// 1-based access, matching xi_1 < xi_2 < ...
    double xi(std::size_t k) const { return zeros.at(k - 1).xi; }
};

/// Scans (0, inf) in steps of 0.5 for sign changes, bisects each bracket to
/// half-width <= tol and polishes with one Newton step kept inside it.
inline BesselZeroTable j1_zeros(std::size_t k_max, double tol = 1e-12)
{
    if (k_max < 1) {
        throw ParameterOutOfRange("j1_zeros: k_max must be at least 1");
    }
    BesselZeroTable table;
    table.tol = tol;
    constexpr double step = 0.5;
    double lo = step;
    double f_lo = bessel_j1_2pi(lo);
    while (table.zeros.size() < k_max) {
        const double hi = lo + step;
        const double f_hi = bessel_j1_2pi(hi);
        if (roots::opposite_signs(f_lo, f_hi)) {
            const roots::Bracket b = roots::bisect(bessel_j1_2pi, {lo, hi, f_lo, f_hi}, tol);
            double xi = b.mid();
            const double newton = xi - bessel_j1_2pi(xi) / bessel_j1_2pi_derivative(xi);
            if (newton >= b.lo && newton <= b.hi) {
                xi = newton;
            }
            table.zeros.push_back({table.zeros.size() + 1, xi, b.half_width()});
        }
        lo = hi;
        f_lo = f_hi;
    }
    return table;
}

struct AdmissibleLevel {
    double value = 0.0;
    /// (n, k) pairs with |2 pi n / xi_k - value| < tol.
    std::vector<std::pair<std::size_t, std::size_t>> representations;

    std::size_t d() const { return representations.size(); }
};

/// All values 2 pi n / xi_k for n <= n_max, k <= k_max, merged when closer
/// than dedup_tol. The count d is a numerical statement within the scanned
/// bounds, not an arithmetic one.
inline std::vector<AdmissibleLevel> admissible_levels(std::size_t n_max, std::size_t k_max,
                                                      const BesselZeroTable& table, double dedup_tol = 1e-9)
{
    if (n_max < 1 || k_max < 1 || table.size() < k_max) {
        throw ParameterOutOfRange("admissible_levels: bounds must be >= 1 and covered by the zero table");
    }
    struct Candidate {
        double value;
        std::size_t n;
        std::size_t k;
    };
    std::vector<Candidate> all;
    all.reserve(n_max * k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
        for (std::size_t n = 1; n <= n_max; ++n) {
            all.push_back({two_pi * static_cast<double>(n) / table.xi(k), n, k});
        }
    }
    std::sort(all.begin(), all.end(), [](const Candidate& l, const Candidate& r) { return l.value < r.value; });
    std::vector<AdmissibleLevel> levels;
    for (const auto& c : all) {
        if (!levels.empty() && std::abs(c.value - levels.back().value) < dedup_tol) {
            levels.back().representations.emplace_back(c.n, c.k);
        } else {
            levels.push_back({c.value, {{c.n, c.k}}});
        }
    }
    return levels;
}

inline std::vector<AdmissibleLevel> admissible_levels(std::size_t n_max, std::size_t k_max)
{
    return admissible_levels(n_max, k_max, j1_zeros(k_max));
}

/// Representations (n, k) of value as 2 pi n / xi_k within the scanned bounds.
inline std::vector<std::pair<std::size_t, std::size_t>> representations_of(double value, std::size_t n_max,
                                                                           const BesselZeroTable& table,
                                                                           double tol = 1e-9)
{
    std::vector<std::pair<std::size_t, std::size_t>> reps;
    for (std::size_t k = 1; k <= table.size(); ++k) {
        for (std::size_t n = 1; n <= n_max; ++n) {
            if (std::abs(two_pi * static_cast<double>(n) / table.xi(k) - value) < tol) {
                reps.emplace_back(n, k);
            }
        }
    }
    return reps;
}

} // namespace magzoll
