#include "racorn/pattern_match.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "racorn/kernels.hpp"

namespace racorn {

namespace {

bool all_equal(const double* a, std::size_t n) {
    for (std::size_t i = 1; i < n; ++i)
        if (a[i] != a[0]) return false;
    return true;
}

// Window statistics shared between the current window and each candidate.
struct WindowStats {
    double mean = 0.0;
    bool flat = false;
};

WindowStats stats_of(const kernels::Table& k, const double* a, std::size_t n) {
    return {k.sum(a, n) / static_cast<double>(n), all_equal(a, n)};
}

double correlate(const kernels::Table& k, const double* a, WindowStats sa, const double* b, WindowStats sb,
                 std::size_t n) {
    if (sa.flat || sb.flat) return 0.0;
    const auto mo = k.centered_moments(a, b, n, sa.mean, sb.mean);
    if (!(mo.saa > 0.0) || !(mo.sbb > 0.0)) return 0.0;
    const double r = mo.sab / std::sqrt(mo.saa * mo.sbb);
    return std::clamp(r, -1.0, 1.0);
}

void check_anchor(SeriesView series, std::size_t t, std::size_t w) {
    if (w == 0) throw std::out_of_range("window width must be at least 1");
    if (t < w || t > series.rows()) {
        throw std::out_of_range("period " + std::to_string(t) + " has no full window of width " +
                                std::to_string(w) + " in a series of " + std::to_string(series.rows()) +
                                " rows");
    }
}

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("pearson: need at least two samples");
    const auto& k = kernels::active();
    const std::size_t n = a.size();
    return correlate(k, a.data(), stats_of(k, a.data(), n), b.data(), stats_of(k, b.data(), n), n);
}

std::vector<double> window_correlations(SeriesView series, std::size_t t, std::size_t w) {
    check_anchor(series, t, w);
    const auto& k = kernels::active();
    const std::size_t m = series.assets();
    const std::size_t len = m * w;
    std::vector<double> out;
    if (t == w) return out;
    if (len < 2) {
        // A single-asset, single-day window has no defined correlation.
        out.assign(t - w, 0.0);
        return out;
    }
    // Window of period j starts at row j-w.
    const double* current = series.data() + (t - w) * m;
    const WindowStats current_stats = stats_of(k, current, len);
    out.reserve(t - w);
    for (std::size_t j = w; j < t; ++j) {
        const double* past = series.data() + (j - w) * m;
        out.push_back(correlate(k, past, stats_of(k, past, len), current, current_stats, len));
    }
    return out;
}

MatchSet select_matches(std::span<const double> correlations, std::size_t t, std::size_t w, double rho) {
    MatchSet set;
    set.anchor = t;
    set.width = w;
    set.threshold = rho;
    for (std::size_t k = 0; k < correlations.size(); ++k)
        if (correlations[k] > rho) set.indices.push_back(w + k);
    return set;
}

MatchSet find_matches(SeriesView series, std::size_t t, std::size_t w, double rho) {
    const auto corr = window_correlations(series, t, w);
    return select_matches(corr, t, w, rho);
}

}  // namespace racorn
