#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "error.hpp"

namespace magzoll {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreNodes {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

inline GaussLegendreNodes compute_gauss_legendre(int n)
{
    GaussLegendreNodes gl;
    gl.nodes.resize(static_cast<std::size_t>(n));
    gl.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    auto legendre = [n](double z) {
        double p0 = 1.0;
        double p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        // (P_n(z), P_n'(z))
        return std::pair{p1, n * (z * p1 - p0) / (z * z - 1.0)};
    };
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(z);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        const double dp = legendre(z).second;
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        gl.nodes[static_cast<std::size_t>(i)] = -z;
        gl.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        gl.weights[static_cast<std::size_t>(i)] = w;
        gl.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) {
        gl.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    }
    return gl;
}

} // namespace detail

/// Cached Gauss-Legendre nodes; thread safe.
inline const GaussLegendreNodes& gauss_legendre(int n)
{
    if (n < 1) {
        throw ParameterOutOfRange("gauss_legendre: need at least one node");
    }
    static std::mutex mutex;
    static std::map<int, GaussLegendreNodes> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
    }
    return it->second;
}

struct QuadratureRule {
    enum class Kind { GaussLegendre, AdaptiveSimpson };

    Kind kind = Kind::GaussLegendre;
    int panels = 64;
    int nodes_per_panel = 16;
    double abs_tol = 1e-13;
    double rel_tol = 1e-13;
    int max_depth = 48;

    static QuadratureRule gauss(int panels, int nodes) { return {Kind::GaussLegendre, panels, nodes}; }

    static QuadratureRule adaptive(double abs_tol, double rel_tol, int max_depth = 48)
    {
        QuadratureRule r;
        r.kind = Kind::AdaptiveSimpson;
        r.abs_tol = abs_tol;
        r.rel_tol = rel_tol;
        r.max_depth = max_depth;
        return r;
    }
};

struct QuadratureResult {
    double value = 0.0;
    double err_est = 0.0;
};

/// Composite Gauss-Legendre rule frozen onto a fixed interval.
///
/// Used on the hot paths (theta integrals for S and Delta) where the same
/// interval is integrated many times.
class CompositeGauss {
public:
    CompositeGauss() = default;

    CompositeGauss(double lo, double hi, int panels, int nodes)
        : lo_(lo), hi_(hi)
    {
        const auto& gl = gauss_legendre(nodes);
        const double width = (hi - lo) / panels;
        points_.reserve(static_cast<std::size_t>(panels * nodes));
        weights_.reserve(points_.capacity());
        for (int p = 0; p < panels; ++p) {
            const double mid = lo + (p + 0.5) * width;
            for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
                points_.push_back(mid + 0.5 * width * gl.nodes[k]);
                weights_.push_back(0.5 * width * gl.weights[k]);
            }
        }
    }

    template <class Fn>
    double apply(Fn&& fn) const
    {
        double sum = 0.0;
        for (std::size_t i = 0; i < points_.size(); ++i) {
            sum += weights_[i] * fn(points_[i]);
        }
        return sum;
    }

    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::vector<double> points_;
    std::vector<double> weights_;
};

namespace detail {

template <class Fn>
double gauss_sum(Fn& fn, double lo, double hi, int panels, int nodes)
{
    const auto& gl = gauss_legendre(nodes);
    const double width = (hi - lo) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * width;
        double panel = 0.0;
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            panel += gl.weights[k] * fn(mid + 0.5 * width * gl.nodes[k]);
        }
        sum += 0.5 * width * panel;
    }
    return sum;
}

template <class Fn>
double simpson_recurse(Fn& fn, double a, double b, double fa, double fm, double fb, double whole, double tol,
                       int depth, double& err)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = fn(lm);
    const double frm = fn(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (std::abs(diff) <= 15.0 * tol) {
        err += std::abs(diff) / 15.0;
        return left + right + diff / 15.0;
    }
    if (depth <= 0) {
        throw NoConvergence("adaptive Simpson: depth limit reached");
    }
    return simpson_recurse(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err) +
           simpson_recurse(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err);
}

} // namespace detail

/// Integrates fn over [lo, hi].
///
/// For the Gauss-Legendre kind the error estimate is the difference against
/// the same rule on half as many panels. The adaptive Simpson kind throws
/// NoConvergence once the recursion exceeds rule.max_depth.
template <class Fn>
QuadratureResult integrate(Fn&& fn, double lo, double hi, const QuadratureRule& rule = {})
{
    if (rule.kind == QuadratureRule::Kind::GaussLegendre) {
        const double fine = detail::gauss_sum(fn, lo, hi, rule.panels, rule.nodes_per_panel);
        double err = 0.0;
        if (rule.panels >= 2) {
            err = std::abs(fine - detail::gauss_sum(fn, lo, hi, rule.panels / 2, rule.nodes_per_panel));
        }
        return {fine, err};
    }

    const double fa = fn(lo);
    const double fb = fn(hi);
    const double fm = fn(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    // A crude magnitude guess keeps rel_tol meaningful from the first level.
    const double scale = std::abs(whole);
    const double tol = std::max(rule.abs_tol, rule.rel_tol * scale);
    double err = 0.0;
    const double value = detail::simpson_recurse(fn, lo, hi, fa, fm, fb, whole, tol, rule.max_depth, err);
    return {value, err};
}

/// Trapezoid sum over one period sampled at n uniform points starting at lo.
/// Spectrally accurate for smooth periodic integrands.
template <class Fn>
double periodic_trapezoid(Fn&& fn, double lo, double period, std::size_t n)
{
    const double h = period / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sum += fn(lo + h * static_cast<double>(k));
    }
    return sum * h;
}

} // namespace magzoll
