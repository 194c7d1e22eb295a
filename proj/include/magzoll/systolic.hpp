#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "integrable.hpp"
#include "roots.hpp"

namespace magzoll {

/// S oscillation below which a system is classified as Zoll.
inline constexpr double zoll_band = 1e-7;

struct SystolicReport {
    double min_S = 0.0;       ///< inf of the magnetic length over contractible closed geodesics = min S
    double max_S = 0.0;
    double bound = 0.0;       ///< pi / <b>
    double slack = 0.0;       ///< bound - min_S
    double argmin_I = 0.0;
    bool zoll_flag = false;   ///< max S - min S < band
    std::size_t grid = 0;
    bool refined = false;     ///< argmin located by a root of Delta
    double band = zoll_band;
};

namespace detail {

inline std::size_t wrap_index(long k, std::size_t n)
{
    const long m = static_cast<long>(n);
    return static_cast<std::size_t>(((k % m) + m) % m);
}

} // namespace detail

/// min S against pi/<b> from an existing profile.
///
/// The grid minimum is refined by solving Delta(I) = 0 on the neighbouring
/// grid cells. Note dS/dI = -Delta: integrating -x sin(theta) by parts gives
/// -S, not S, so S decreases where the return shift is positive.
inline SystolicReport systole(const FirstIntegralChart& chart, const ActionProfile& profile, double band = zoll_band)
{
    SystolicReport rep;
    rep.grid = profile.size();
    rep.band = band;
    rep.bound = std::numbers::pi / chart.period();
    const auto it = std::min_element(profile.S_vals.begin(), profile.S_vals.end());
    const std::size_t k = static_cast<std::size_t>(it - profile.S_vals.begin());
    rep.min_S = *it;
    rep.max_S = profile.max_S();
    rep.argmin_I = profile.I_grid[k];
    rep.zoll_flag = (rep.max_S - rep.min_S) < band;

    if (!rep.zoll_flag) {
        const std::size_t n = profile.size();
        const double h = profile.period / static_cast<double>(n);
        const std::size_t km = detail::wrap_index(static_cast<long>(k) - 1, n);
        const std::size_t kp = detail::wrap_index(static_cast<long>(k) + 1, n);
        const double I = profile.I_grid[k];
        // Delta changes from >= 0 to <= 0 across a minimum of S.
        roots::Bracket br{};
        bool have = false;
        if (profile.Delta_vals[km] >= 0.0 && profile.Delta_vals[k] <= 0.0) {
            br = {I - h, I, profile.Delta_vals[km], profile.Delta_vals[k]};
            have = true;
        } else if (profile.Delta_vals[k] >= 0.0 && profile.Delta_vals[kp] <= 0.0) {
            br = {I, I + h, profile.Delta_vals[k], profile.Delta_vals[kp]};
            have = true;
        }
        if (have) {
            const auto root = roots::brent([&chart](double J) { return delta(chart, J); }, br, 1e-14);
            const double S_star = action_S(chart, root.x);
            if (S_star <= rep.min_S) {
                rep.min_S = S_star;
                rep.argmin_I = root.x;
            }
            rep.refined = true;
        }
    }
    rep.slack = rep.bound - rep.min_S;
    return rep;
}

inline SystolicReport systole(const FirstIntegralChart& chart, std::size_t grid = 512, double band = zoll_band)
{
    return systole(chart, action_profile(chart, grid), band);
}

struct CriticalLevel {
    enum class Type { Min, Max, Degenerate };
    double I = 0.0;
    double S = 0.0;
    Type type = Type::Degenerate;
};

inline const char* to_string(CriticalLevel::Type t)
{
    switch (t) {
    case CriticalLevel::Type::Min: return "min";
    case CriticalLevel::Type::Max: return "max";
    default: return "degenerate";
    }
}

struct CriticalSet {
    /// Delta vanishes on the whole grid (S constant): every level is critical.
    bool all_critical = false;
    std::vector<CriticalLevel> levels;
};

/// Critical points of S = sign changes of Delta on the profile grid, refined
/// with Brent's method. Each one is a level whose geodesics close up
/// contractibly with turning number +1.
inline CriticalSet critical_levels(const FirstIntegralChart& chart, const ActionProfile& profile,
                                   double tol = 1e-10)
{
    CriticalSet out;
    const std::size_t n = profile.size();
    double max_abs = 0.0;
    for (double d : profile.Delta_vals) max_abs = std::max(max_abs, std::abs(d));
    if (max_abs < tol) {
        out.all_critical = true;
        return out;
    }
    const double h = profile.period / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t kn = (k + 1) % n;
        const double d0 = profile.Delta_vals[k];
        const double d1 = profile.Delta_vals[kn];
        const bool up = d0 < 0.0 && d1 >= 0.0;
        const bool down = d0 > 0.0 && d1 <= 0.0;
        if (!up && !down) continue;
        const double I0 = profile.I_grid[k];
        const auto root = roots::brent([&chart](double J) { return delta(chart, J); }, {I0, I0 + h, d0, d1}, 1e-14);
        CriticalLevel lvl;
        lvl.I = root.x;
        lvl.S = action_S(chart, root.x);
        const double slope = (d1 - d0) / h;
        if (std::abs(slope) < tol) {
            lvl.type = CriticalLevel::Type::Degenerate;
        } else {
            // dS/dI = -Delta
            lvl.type = up ? CriticalLevel::Type::Max : CriticalLevel::Type::Min;
        }
        out.levels.push_back(lvl);
    }
    return out;
}

} // namespace magzoll
