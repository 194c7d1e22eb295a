#pragma once

#include <cctype>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "periodic.hpp"
#include "system.hpp"
#include "zoll.hpp"

namespace magzoll {

/// Parameters of a `b.zoll = {n, xi_index, m0, u0, s}` entry.
struct ZollParams {
    std::size_t n = 1;
    std::size_t xi_index = 1;
    std::size_t m0 = 0;  ///< 0 selects m0 = n
    double u0 = 0.0;
    double s = 0.0;
};

/// Contents of a system specification file.
///
///   # comment
///   a.coeffs = c0, a1, b1, a2, b2, ...   (optional, default 1)
///   b.coeffs = c0, a1, b1, ...           (or b.zoll, not both)
///   b.zoll   = {n, xi_index, m0, u0, s}
///   L        = 1
///
/// A coefficient list holds c0 followed by the cosine/sine pair of each
/// harmonic: f(x) = c0 + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x).
struct SystemSpec {
    std::optional<TrigSeries> a;
    std::optional<TrigSeries> b;
    std::optional<ZollParams> zoll;
    double L = 1.0;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    std::size_t lo = 0;
    std::size_t hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

inline double parse_number(const std::string& text, const std::string& where)
{
    const std::string t = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw UsageError(where + ": not a number: '" + t + "'");
    }
    if (used != t.size()) {
        throw UsageError(where + ": trailing characters in '" + t + "'");
    }
    return v;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& where)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_number(item, where));
    }
    if (out.empty()) {
        throw UsageError(where + ": empty list");
    }
    return out;
}

inline TrigSeries series_from_list(const std::vector<double>& v)
{
    TrigSeries s;
    s.c0 = v[0];
    for (std::size_t i = 1; i < v.size(); i += 2) {
        s.cos_coeffs.push_back(v[i]);
        s.sin_coeffs.push_back(i + 1 < v.size() ? v[i + 1] : 0.0);
    }
    return s;
}

/// Shortest of %.15g, %.16g, %.17g that reads back to the same double.
inline std::string format_exact(double v)
{
    char buf[40];
    for (int digits = 15; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline std::size_t parse_count(const std::string& text, const std::string& where)
{
    const double v = parse_number(text, where);
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw UsageError(where + ": expected a non-negative integer, got '" + trim(text) + "'");
    }
    return static_cast<std::size_t>(v);
}

} // namespace detail

inline SystemSpec parse_system_spec(std::istream& in, const std::string& source = "spec")
{
    SystemSpec spec;
    std::string line;
    std::size_t lineno = 0;
    bool have_L = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos) {
            throw UsageError(where + ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key == "a.coeffs") {
            if (spec.a) throw UsageError(where + ": duplicate a.coeffs");
            spec.a = detail::series_from_list(detail::parse_list(value, where));
        } else if (key == "b.coeffs") {
            if (spec.b) throw UsageError(where + ": duplicate b.coeffs");
            spec.b = detail::series_from_list(detail::parse_list(value, where));
        } else if (key == "b.zoll") {
            if (spec.zoll) throw UsageError(where + ": duplicate b.zoll");
            if (value.size() < 2 || value.front() != '{' || value.back() != '}') {
                throw UsageError(where + ": b.zoll must be {n, xi_index, m0, u0, s}");
            }
            std::vector<std::string> items;
            std::stringstream ss(value.substr(1, value.size() - 2));
            std::string item;
            while (std::getline(ss, item, ',')) items.push_back(item);
            if (items.size() != 5) {
                throw UsageError(where + ": b.zoll needs 5 entries {n, xi_index, m0, u0, s}");
            }
            ZollParams z;
            z.n = detail::parse_count(items[0], where);
            z.xi_index = detail::parse_count(items[1], where);
            z.m0 = detail::parse_count(items[2], where);
            z.u0 = detail::parse_number(items[3], where);
            z.s = detail::parse_number(items[4], where);
            spec.zoll = z;
        } else if (key == "L") {
            if (have_L) throw UsageError(where + ": duplicate L");
            spec.L = detail::parse_number(value, where);
            have_L = true;
        } else {
            throw UsageError(where + ": unknown key '" + key + "'");
        }
    }
    if (spec.b && spec.zoll) {
        throw UsageError(source + ": b.coeffs and b.zoll are mutually exclusive");
    }
    if (!spec.b && !spec.zoll) {
        throw UsageError(source + ": one of b.coeffs or b.zoll is required");
    }
    if (spec.zoll && spec.a && !(spec.a->is_constant() && spec.a->c0 == 1.0)) {
        throw UsageError(source + ": b.zoll requires a flat metric (a.coeffs = 1 or omitted)");
    }
    if (!(spec.L > 0.0)) {
        throw UsageError(source + ": L must be positive");
    }
    return spec;
}

inline SystemSpec read_system_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open spec file '" + path + "'");
    }
    return parse_system_spec(in, path);
}

inline std::string coeff_list(const TrigSeries& s)
{
    std::string out = detail::format_exact(s.c0);
    for (std::size_t k = 1; k <= s.order(); ++k) {
        out += ", " + detail::format_exact(s.cos_at(k)) + ", " + detail::format_exact(s.sin_at(k));
    }
    return out;
}

inline std::string write_system_spec(const SystemSpec& spec)
{
    std::ostringstream out;
    if (spec.a) out << "a.coeffs = " << coeff_list(*spec.a) << '\n';
    if (spec.b) out << "b.coeffs = " << coeff_list(*spec.b) << '\n';
    if (spec.zoll) {
        const ZollParams& z = *spec.zoll;
        out << "b.zoll = {" << z.n << ", " << z.xi_index << ", " << z.m0 << ", " << detail::format_exact(z.u0) << ", "
            << detail::format_exact(z.s) << "}\n";
    }
    out << "L = " << detail::format_exact(spec.L) << '\n';
    return out.str();
}

inline ZollFamily family_from(const ZollParams& z)
{
    return make_family(z.n, z.xi_index, z.m0, z.u0, z.s);
}

inline MagneticSystem build_system(const SystemSpec& spec)
{
    if (spec.zoll) {
        return family_system(family_from(*spec.zoll), spec.L);
    }
    const TrigSeries a = spec.a ? *spec.a : TrigSeries{1.0, {}, {}};
    return make_system(a, *spec.b, spec.L);
}

} // namespace magzoll
