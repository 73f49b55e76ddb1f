#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace racorn {

/// Raised for malformed or invalid market data. Carries the offending
/// location when one is known (line is 1-based and counts the header).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Row-major read-only view over an n x m grid of price relatives.
///
/// A view may be a prefix of a longer series; strategies only ever receive
/// the prefix of rows strictly before the period they are deciding on.
class SeriesView {
public:
    SeriesView() = default;
    SeriesView(const double* data, std::size_t rows, std::size_t assets)
        : data_(data), rows_(rows), assets_(assets) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t assets() const noexcept { return assets_; }
    std::span<const double> row(std::size_t t) const {
        return {data_ + t * assets_, assets_};
    }
    const double* data() const noexcept { return data_; }

    /// First `t` rows only.
    SeriesView head(std::size_t t) const;

private:
    const double* data_ = nullptr;
    std::size_t rows_ = 0;
    std::size_t assets_ = 0;
};

/// Closing prices as loaded from disk.
struct PriceSeries {
    std::vector<double> closes;  // n_raw x m, row-major
    std::vector<std::string> asset_names;
    std::vector<std::string> period_labels;  // empty when the file has no date column

    std::size_t rows() const noexcept {
        return asset_names.empty() ? 0 : closes.size() / asset_names.size();
    }
    std::size_t assets() const noexcept { return asset_names.size(); }
    double at(std::size_t t, std::size_t i) const { return closes[t * assets() + i]; }
};

/// Strictly positive, finite price relatives x[t][i] = P(t+1,i) / P(t,i).
class PriceRelativeSeries {
public:
    PriceRelativeSeries() = default;
    /// Validates every entry; throws DataError naming row, column and value.
    PriceRelativeSeries(std::vector<double> relatives, std::vector<std::string> asset_names,
                        std::vector<std::string> period_labels = {});

    std::size_t rows() const noexcept { return assets() == 0 ? 0 : relatives_.size() / assets(); }
    std::size_t assets() const noexcept { return asset_names_.size(); }
    double at(std::size_t t, std::size_t i) const { return relatives_[t * assets() + i]; }
    std::span<const double> row(std::size_t t) const {
        return {relatives_.data() + t * assets(), assets()};
    }
    const std::vector<double>& values() const noexcept { return relatives_; }
    const std::vector<std::string>& asset_names() const noexcept { return asset_names_; }
    /// One label per row, possibly empty strings when the source had no dates.
    const std::vector<std::string>& period_labels() const noexcept { return period_labels_; }

    SeriesView view() const { return {relatives_.data(), rows(), assets()}; }

private:
    std::vector<double> relatives_;
    std::vector<std::string> asset_names_;
    std::vector<std::string> period_labels_;
};

/// The w rows preceding period t, flattened chronologically with each
/// day's m assets contiguous.
struct MarketWindow {
    std::vector<double> flat;
    std::size_t anchor = 0;
    std::size_t width = 0;
};

PriceRelativeSeries derive_relatives(const PriceSeries& prices);

/// Zero-based: rows t-w .. t-1. Requires t >= w and t <= rows.
MarketWindow window(SeriesView series, std::size_t t, std::size_t w);
inline MarketWindow window(const PriceRelativeSeries& series, std::size_t t, std::size_t w) {
    return window(series.view(), t, w);
}

enum class InputMode { prices, relatives };

InputMode parse_input_mode(const std::string& text);
const char* to_string(InputMode mode);

/// One problem found while scanning a CSV file.
struct CsvIssue {
    std::size_t line = 0;    // 1-based, header is line 1
    std::size_t column = 0;  // 1-based asset column, 0 when not cell-specific
    std::string message;
    bool fatal = true;
};

/// Result of a lenient pass over a CSV file. Collects every issue rather
/// than stopping at the first one; the loaders turn the first fatal issue
/// into a DataError.
struct CsvScan {
    std::vector<std::string> asset_names;
    std::vector<std::string> period_labels;
    std::vector<double> values;  // row-major; only meaningful when no fatal issue
    std::size_t rows = 0;
    std::vector<CsvIssue> issues;

    bool ok() const;
};

/// Relatives outside [1/suspicious, suspicious] are flagged as warnings.
inline constexpr double kSuspiciousRelative = 10.0;

CsvScan scan_csv(const std::filesystem::path& path, InputMode mode);

PriceSeries load_prices_csv(const std::filesystem::path& path);
PriceRelativeSeries load_relatives_csv(const std::filesystem::path& path);

/// Loads either mode and returns relatives (prices are converted).
PriceRelativeSeries load_series(const std::filesystem::path& path, InputMode mode);

void write_prices_csv(const std::filesystem::path& path, const PriceSeries& prices);
void write_relatives_csv(const std::filesystem::path& path, const PriceRelativeSeries& series);

}  // namespace racorn
