#include "racorn/market_data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace racorn {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            return cells;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

bool parse_number(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string describe(const CsvIssue& issue, const std::filesystem::path& path) {
    std::ostringstream os;
    os << path.string() << ": line " << issue.line;
    if (issue.column != 0) os << ", column " << issue.column;
    os << ": " << issue.message;
    return os.str();
}

void throw_first_fatal(const CsvScan& scan, const std::filesystem::path& path) {
    for (const auto& issue : scan.issues) {
        if (issue.fatal) throw DataError(describe(issue, path), issue.line);
    }
}

void write_rows(std::ostream& os, const std::vector<std::string>& names,
                const std::vector<std::string>& labels, const std::vector<double>& values) {
    const bool dated = !labels.empty();
    if (dated) os << "date,";
    for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
    os << '\n';
    const std::size_t m = names.size();
    const std::size_t n = m == 0 ? 0 : values.size() / m;
    for (std::size_t t = 0; t < n; ++t) {
        if (dated) os << labels[t] << ',';
        for (std::size_t i = 0; i < m; ++i) os << (i ? "," : "") << format_value(values[t * m + i]);
        os << '\n';
    }
}

}  // namespace

SeriesView SeriesView::head(std::size_t t) const {
    if (t > rows_) throw std::out_of_range("SeriesView::head: prefix longer than series");
    return {data_, t, assets_};
}

PriceRelativeSeries::PriceRelativeSeries(std::vector<double> relatives,
                                         std::vector<std::string> asset_names,
                                         std::vector<std::string> period_labels)
    : relatives_(std::move(relatives)),
      asset_names_(std::move(asset_names)),
      period_labels_(std::move(period_labels)) {
    const std::size_t m = asset_names_.size();
    if (m == 0) throw DataError("price relatives need at least one asset");
    if (relatives_.size() % m != 0) throw DataError("price relative grid is ragged");
    for (std::size_t k = 0; k < relatives_.size(); ++k) {
        const double v = relatives_[k];
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DataError("price relative at row " + std::to_string(k / m) + ", column " +
                            std::to_string(k % m) + " is not strictly positive and finite: " +
                            format_value(v));
        }
    }
    if (period_labels_.empty()) period_labels_.assign(rows(), std::string());
    if (period_labels_.size() != rows()) throw DataError("period label count does not match rows");
}

PriceRelativeSeries derive_relatives(const PriceSeries& prices) {
    const std::size_t m = prices.assets();
    const std::size_t n_raw = prices.rows();
    if (m == 0 || prices.closes.size() != n_raw * m) throw DataError("price grid is ragged or empty");
    if (n_raw < 2) throw DataError("need at least two price rows to form relatives");
    for (std::size_t t = 0; t < n_raw; ++t) {
        for (std::size_t i = 0; i < m; ++i) {
            const double p = prices.at(t, i);
            if (!(p > 0.0) || !std::isfinite(p)) {
                throw DataError("close at row " + std::to_string(t) + ", column " + std::to_string(i) +
                                " is not strictly positive and finite: " + format_value(p));
            }
        }
    }
    std::vector<double> rel((n_raw - 1) * m);
    for (std::size_t t = 0; t + 1 < n_raw; ++t)
        for (std::size_t i = 0; i < m; ++i) rel[t * m + i] = prices.at(t + 1, i) / prices.at(t, i);

    // Relative t is realised at the close of row t+1.
    std::vector<std::string> labels;
    if (!prices.period_labels.empty())
        labels.assign(prices.period_labels.begin() + 1, prices.period_labels.end());
    return PriceRelativeSeries(std::move(rel), prices.asset_names, std::move(labels));
}

MarketWindow window(SeriesView series, std::size_t t, std::size_t w) {
    if (w == 0) throw std::out_of_range("window width must be at least 1");
    if (t < w) {
        throw std::out_of_range("window(t=" + std::to_string(t) + ", w=" + std::to_string(w) +
                                ") reaches before the first row");
    }
    if (t > series.rows()) throw std::out_of_range("window anchor past the end of the series");
    const std::size_t m = series.assets();
    MarketWindow out;
    out.anchor = t;
    out.width = w;
    const double* begin = series.data() + (t - w) * m;
    out.flat.assign(begin, begin + w * m);
    return out;
}

InputMode parse_input_mode(const std::string& text) {
    if (text == "prices") return InputMode::prices;
    if (text == "relatives") return InputMode::relatives;
    throw std::invalid_argument("unknown input mode '" + text + "' (expected prices or relatives)");
}

const char* to_string(InputMode mode) {
    return mode == InputMode::prices ? "prices" : "relatives";
}

bool CsvScan::ok() const {
    for (const auto& issue : issues)
        if (issue.fatal) return false;
    return true;
}

CsvScan scan_csv(const std::filesystem::path& path, InputMode mode) {
    CsvScan scan;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        scan.issues.push_back({0, 0, "cannot open file", true});
        return scan;
    }

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> header;
    std::string header_text;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header_text = line;
            break;
        }
    }
    if (header_text.empty()) {
        scan.issues.push_back({line_no == 0 ? 1 : line_no, 0, "file is empty", true});
        return scan;
    }
    // Strip a UTF-8 byte order mark.
    if (header_text.rfind("\xEF\xBB\xBF", 0) == 0) header_text.erase(0, 3);
    header = split_commas(header_text);

    int dated = -1;  // decided on the first data row
    std::size_t m = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_commas(line);

        if (dated < 0) {
            double probe = 0.0;
            dated = parse_number(cells.front(), probe) ? 0 : 1;
            m = cells.size() - static_cast<std::size_t>(dated);
            std::size_t skip = 0;
            if (dated == 1 && header.size() == m + 1) skip = 1;
            if (header.size() != m + skip) {
                scan.issues.push_back({1, 0,
                                       "header has " + std::to_string(header.size()) +
                                           " names but the first data row has " + std::to_string(m) +
                                           " values",
                                       true});
                return scan;
            }
            for (std::size_t i = skip; i < header.size(); ++i) {
                if (header[i].empty())
                    scan.issues.push_back({1, i + 1 - skip, "empty asset name", true});
                scan.asset_names.emplace_back(header[i]);
            }
            if (m == 0) {
                scan.issues.push_back({line_no, 0, "no asset columns", true});
                return scan;
            }
        }

        const std::size_t offset = static_cast<std::size_t>(dated);
        if (cells.size() != m + offset) {
            scan.issues.push_back({line_no, 0,
                                   "expected " + std::to_string(m + offset) + " cells, found " +
                                       std::to_string(cells.size()),
                                   true});
            continue;
        }
        if (dated == 1) scan.period_labels.emplace_back(cells.front());
        for (std::size_t i = 0; i < m; ++i) {
            const auto cell = cells[i + offset];
            double v = 0.0;
            if (cell.empty()) {
                scan.issues.push_back({line_no, i + 1, "missing value", true});
            } else if (!parse_number(cell, v)) {
                scan.issues.push_back({line_no, i + 1, "non-numeric cell '" + std::string(cell) + "'", true});
            } else if (!std::isfinite(v) || v <= 0.0) {
                scan.issues.push_back({line_no, i + 1,
                                       std::string(mode == InputMode::prices ? "price" : "relative") +
                                           " must be strictly positive and finite, got " + std::string(cell),
                                       true});
            } else if (mode == InputMode::relatives &&
                       (v > kSuspiciousRelative || v < 1.0 / kSuspiciousRelative)) {
                scan.issues.push_back({line_no, i + 1,
                                       "suspicious relative magnitude " + std::string(cell) +
                                           " (is this a prices file?)",
                                       false});
            }
            scan.values.push_back(v);
        }
        ++scan.rows;
    }

    if (dated < 0) {
        scan.issues.push_back({line_no, 0, "no data rows after the header", true});
        return scan;
    }
    if (mode == InputMode::prices && scan.rows < 2)
        scan.issues.push_back({line_no, 0, "prices mode needs at least two rows", true});
    return scan;
}

PriceSeries load_prices_csv(const std::filesystem::path& path) {
    auto scan = scan_csv(path, InputMode::prices);
    throw_first_fatal(scan, path);
    PriceSeries out;
    out.closes = std::move(scan.values);
    out.asset_names = std::move(scan.asset_names);
    out.period_labels = std::move(scan.period_labels);
    return out;
}

PriceRelativeSeries load_relatives_csv(const std::filesystem::path& path) {
    auto scan = scan_csv(path, InputMode::relatives);
    throw_first_fatal(scan, path);
    return PriceRelativeSeries(std::move(scan.values), std::move(scan.asset_names),
                               std::move(scan.period_labels));
}

PriceRelativeSeries load_series(const std::filesystem::path& path, InputMode mode) {
    if (mode == InputMode::prices) return derive_relatives(load_prices_csv(path));
    return load_relatives_csv(path);
}

void write_prices_csv(const std::filesystem::path& path, const PriceSeries& prices) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_rows(out, prices.asset_names, prices.period_labels, prices.closes);
}

void write_relatives_csv(const std::filesystem::path& path, const PriceRelativeSeries& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    bool any_label = false;
    for (const auto& l : series.period_labels()) any_label = any_label || !l.empty();
    write_rows(out, series.asset_names(), any_label ? series.period_labels() : std::vector<std::string>{},
               series.values());
}

}  // namespace racorn
