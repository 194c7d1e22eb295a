#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "bessel.hpp"
#include "zoll.hpp"

namespace magzoll {

using Polyline = std::vector<PlanePoint>;

/// Splits a lifted curve into pieces lying in single cells of the lattice
/// Z x LZ, each translated back into [0, 1) x [0, L). Segments that cross a
/// cell boundary are cut at the crossing point, which ends one piece and
/// starts the next.
inline std::vector<Polyline> lattice_pieces(const Polyline& lifted, double L)
{
    std::vector<Polyline> pieces;
    if (lifted.empty()) return pieces;
    struct Cell {
        double cx, cy;
        bool operator==(const Cell&) const = default;
    };
    auto cell_of = [L](const PlanePoint& p) { return Cell{std::floor(p.x), std::floor(p.y / L)}; };
    auto reduce = [L](const PlanePoint& p, const Cell& c) { return PlanePoint{p.x - c.cx, p.y - c.cy * L}; };
    auto lerp = [](const PlanePoint& p, const PlanePoint& q, double t) {
        return PlanePoint{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
    };

    Cell cur = cell_of(lifted.front());
    pieces.push_back({reduce(lifted.front(), cur)});
    for (std::size_t i = 1; i < lifted.size(); ++i) {
        const PlanePoint& p = lifted[i - 1];
        const PlanePoint& q = lifted[i];
        const Cell next = cell_of(q);
        if (next == cur) {
            pieces.back().push_back(reduce(q, cur));
            continue;
        }
        std::vector<double> cuts;
        const double xlo = std::min(p.x, q.x);
        const double xhi = std::max(p.x, q.x);
        for (double g = std::ceil(xlo); g <= xhi; g += 1.0) {
            if (q.x != p.x) cuts.push_back((g - p.x) / (q.x - p.x));
        }
        const double ylo = std::min(p.y, q.y) / L;
        const double yhi = std::max(p.y, q.y) / L;
        for (double g = std::ceil(ylo); g <= yhi; g += 1.0) {
            if (q.y != p.y) cuts.push_back((g * L - p.y) / (q.y - p.y));
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.push_back(1.0);
        double t_prev = 0.0;
        for (double t : cuts) {
            if (t <= t_prev) continue;
            const Cell c = cell_of(lerp(p, q, 0.5 * (t_prev + t)));
            if (!(c == cur)) {
                const PlanePoint cross = lerp(p, q, t_prev);
                pieces.back().push_back(reduce(cross, cur));
                cur = c;
                pieces.push_back({reduce(cross, cur)});
            }
            t_prev = t;
        }
        pieces.back().push_back(reduce(q, cur));
    }
    pieces.erase(std::remove_if(pieces.begin(), pieces.end(), [](const Polyline& pl) { return pl.size() < 2; }),
                 pieces.end());
    return pieces;
}

struct FigureCurve {
    double I = 0.0;
    Polyline lifted;                ///< closed-form samples, unreduced
    std::vector<Polyline> pieces;   ///< lattice-reduced polylines
};

struct FigurePanel {
    std::size_t k = 0;
    ZollFamily family;
    std::vector<FigureCurve> curves;
};

struct Figure {
    std::size_t n = 1;
    std::size_t xi_index = 1;
    double b_con = 0.0;
    double L = 1.0;
    std::vector<FigurePanel> panels;
};

struct FigureOptions {
    std::size_t panels = 6;     ///< s = (k / (panels - 1)) / b_con, k = 0..panels-1
    std::size_t levels = 5;     ///< I = j <b> / levels
    std::size_t samples = 2048;
    double L = 1.0;
    double theta0 = -0.5 * std::numbers::pi;
};

/// Geodesics of the family attached to 2 pi n / xi_k. The last panel sits on
/// the excluded endpoint s = 1/b_con and is rendered at the clamped value.
inline Figure build_figure(std::size_t n, std::size_t xi_index, const FigureOptions& opt = {})
{
    const BesselZeroTable table = j1_zeros(std::max<std::size_t>(xi_index, 1));
    Figure fig;
    fig.n = n;
    fig.xi_index = xi_index;
    fig.L = opt.L;
    const ZollFamily base = make_family(n, xi_index, 0, 0.0, 0.0, table);
    fig.b_con = base.b_con;
    const double limit = (1.0 - zoll_clamp_margin) / base.b_con;
    for (std::size_t k = 0; k < opt.panels; ++k) {
        const double frac = opt.panels > 1 ? static_cast<double>(k) / static_cast<double>(opt.panels - 1) : 0.0;
        const double s = frac / base.b_con;
        FigurePanel panel;
        panel.k = k;
        panel.family = make_family(n, xi_index, 0, 0.0, std::min(s, limit), table);
        panel.family.s = s;
        panel.family.clamped = panel.family.s_eff != s;
        fig.panels.push_back(std::move(panel));
    }
    const std::size_t total = opt.panels * opt.levels;
    auto curves = parallel_map<FigureCurve>(total, [&](std::size_t idx) {
        const FigurePanel& panel = fig.panels[idx / opt.levels];
        const std::size_t j = idx % opt.levels;
        FigureCurve c;
        c.I = base.b_con * static_cast<double>(j) / static_cast<double>(opt.levels);
        c.lifted = closed_form_orbit(panel.family, c.I, opt.samples, opt.theta0);
        c.pieces = lattice_pieces(c.lifted, opt.L);
        return c;
    });
    for (std::size_t idx = 0; idx < total; ++idx) {
        fig.panels[idx / opt.levels].curves.push_back(std::move(curves[idx]));
    }
    return fig;
}

namespace detail {

/// Viridis-like ramp, t in [0, 1].
inline std::string level_color(double t)
{
    static constexpr std::array<std::array<int, 3>, 5> stops{{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37},
    }};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), 3);
    const double f = t - static_cast<double>(i);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) {
        rgb[c] = static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
    }
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

} // namespace detail

/// SVG 1.1 rendering: panels of 300 x 300 units, three per row, the torus
/// drawn as the unit square scaled by (1, L).
inline std::string render_svg(const Figure& fig)
{
    constexpr double panel = 300.0;
    constexpr double gap = 20.0;
    constexpr double title = 24.0;
    const std::size_t cols = std::min<std::size_t>(3, std::max<std::size_t>(1, fig.panels.size()));
    const std::size_t rows = (fig.panels.size() + cols - 1) / cols;
    const double scale = panel / std::max(1.0, fig.L);
    const double width = gap + static_cast<double>(cols) * (panel + gap);
    const double height = gap + static_cast<double>(rows) * (panel + title + gap);

    std::ostringstream out;
    char buf[160];
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%g\" height=\"%g\" "
                  "viewBox=\"0 0 %g %g\">\n",
                  width, height, width, height);
    out << buf;
    out << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t p = 0; p < fig.panels.size(); ++p) {
        const FigurePanel& pn = fig.panels[p];
        const double ox = gap + static_cast<double>(p % cols) * (panel + gap);
        const double oy = gap + static_cast<double>(p / cols) * (panel + title + gap) + title;
        const double w = scale;
        const double h = scale * fig.L;
        std::snprintf(buf, sizeof buf, "<g id=\"panel-%zu\">\n<text x=\"%g\" y=\"%g\" font-size=\"14\" "
                      "font-family=\"sans-serif\">",
                      pn.k, ox, oy - 8.0);
        out << buf;
        std::snprintf(buf, sizeof buf, "s = %zu/%zu b_con^-1%s</text>\n", pn.k, fig.panels.size() - 1,
                      pn.family.clamped ? " (clamped)" : "");
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"#888888\"/>\n", ox,
                      oy, w, h);
        out << buf;
        const std::size_t levels = pn.curves.size();
        for (std::size_t j = 0; j < levels; ++j) {
            const FigureCurve& c = pn.curves[j];
            const double t = levels > 1 ? static_cast<double>(j) / static_cast<double>(levels - 1) : 0.0;
            const std::string color = detail::level_color(t);
            for (const Polyline& piece : c.pieces) {
                out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
                for (std::size_t i = 0; i < piece.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", ox + piece[i].x * scale,
                                  oy + h - piece[i].y * scale);
                    out << buf;
                }
                out << "\"/>\n";
            }
        }
        out << "</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace magzoll
