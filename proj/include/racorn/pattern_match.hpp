#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "racorn/market_data.hpp"

namespace racorn {

// Index convention
// ----------------
// Periods are zero-based here. Period t is decided from rows 0..t-1 and
// realised by row t. Its market window is rows t-w..t-1, which exists when
// t >= w. A historical period j is admissible when its own window and its
// row both lie strictly in the past: w <= j < t. In one-based numbering
// (period p = t+1, q = j+1) this is w < q < p.

/// Historical periods whose window correlates with the current window
/// above the threshold.
struct MatchSet {
    std::size_t anchor = 0;
    std::size_t width = 0;
    double threshold = 0.0;
    std::vector<std::size_t> indices;  // strictly increasing

    bool empty() const noexcept { return indices.empty(); }
    std::size_t size() const noexcept { return indices.size(); }
};

/// Pearson correlation. Returns 0 when either input has zero variance
/// (all entries identical). Throws std::invalid_argument on length
/// mismatch or length < 2.
double pearson(std::span<const double> a, std::span<const double> b);

/// Correlation of every admissible historical window with the window of
/// period t; element k belongs to period j = w + k. Empty when t <= w.
/// Requires t >= w and t <= series.rows().
std::vector<double> window_correlations(SeriesView series, std::size_t t, std::size_t w);

/// Periods j with w <= j < t and correlation strictly greater than rho.
MatchSet find_matches(SeriesView series, std::size_t t, std::size_t w, double rho);
inline MatchSet find_matches(const PriceRelativeSeries& series, std::size_t t, std::size_t w, double rho) {
    return find_matches(series.view(), t, w, rho);
}

/// Filters precomputed correlations (from window_correlations) by rho.
MatchSet select_matches(std::span<const double> correlations, std::size_t t, std::size_t w, double rho);

}  // namespace racorn
