#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "periodic.hpp"
#include "system.hpp"

namespace magzoll {

struct CorpusOptions {
    std::size_t count = 100;
    std::uint64_t seed = 20240607;
    std::size_t max_harmonics = 4;
    double min_margin = 0.1;
    double L = 1.0;
    bool flat = false;  ///< a = 1 and b with at least one harmonic
};

struct CorpusEntry {
    MagneticSystem sys;
    double margin = 0.0;
    std::size_t draw = 0;  ///< index of the accepted draw in the rejection sequence
};

/// Reproducible random systems: trigonometric a, b with at most max_harmonics
/// harmonics each, rejection-sampled for section_condition_margin > min_margin.
///
/// a = 1 + sum (small coefficients) / k, so int a = 1 before normalization.
/// b = b0 (1 + sum coefficients / k) with b0 in [0.5, 3].
inline std::vector<CorpusEntry> random_corpus(const CorpusOptions& opt = {})
{
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> b0_dist(0.5, 3.0);
    std::uniform_int_distribution<std::size_t> order(0, opt.max_harmonics);
    std::uniform_int_distribution<std::size_t> nonzero_order(1, std::max<std::size_t>(opt.max_harmonics, 1));

    std::vector<CorpusEntry> out;
    out.reserve(opt.count);
    std::size_t draw = 0;
    while (out.size() < opt.count) {
        ++draw;
        TrigSeries a;
        a.c0 = 1.0;
        const std::size_t ka = opt.flat ? 0 : order(rng);
        for (std::size_t k = 1; k <= ka; ++k) {
            a.cos_coeffs.push_back(0.12 * unit(rng) / static_cast<double>(k));
            a.sin_coeffs.push_back(0.12 * unit(rng) / static_cast<double>(k));
        }
        TrigSeries b;
        b.c0 = b0_dist(rng);
        const std::size_t kb = opt.flat ? nonzero_order(rng) : order(rng);
        for (std::size_t k = 1; k <= kb; ++k) {
            b.cos_coeffs.push_back(0.25 * b.c0 * unit(rng) / static_cast<double>(k));
            b.sin_coeffs.push_back(0.25 * b.c0 * unit(rng) / static_cast<double>(k));
        }
        if (a.lower_bound() <= 0.0) continue;
        MagneticSystem sys = make_system(a, b, opt.L);
        const double margin = section_condition_margin(sys);
        if (margin > opt.min_margin) {
            out.push_back({std::move(sys), margin, draw});
        }
    }
    return out;
}

} // namespace magzoll
