#include "racorn/report.hpp"

#include <cmath>
#include <cstdio>

namespace racorn {

namespace {

std::string number(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    return out + "\"";
}

// Groups "section.key" entries into nested objects.
void write_config(std::ostream& os, const std::map<std::string, std::string>& config) {
    os << "{";
    std::string open_section;
    bool first_section = true;
    bool first_key = true;
    for (const auto& [key, value] : config) {
        const auto dot = key.find('.');
        const std::string section = key.substr(0, dot);
        const std::string name = key.substr(dot + 1);
        if (section != open_section || first_section) {
            if (!first_section) os << "}";
            os << (first_section ? "\n    " : ",\n    ") << quoted(section) << ": {";
            open_section = section;
            first_section = false;
            first_key = true;
        }
        os << (first_key ? "" : ", ") << quoted(name) << ": " << quoted(value);
        first_key = false;
    }
    if (!first_section) os << "}\n  ";
    os << "}";
}

}  // namespace

std::string format_sharpe(const SharpeRatio& sr, int precision) {
    if (!sr.defined) return "undefined";
    return precision < 0 ? number(sr.value) : fixed(sr.value, precision);
}

void write_report_json(std::ostream& os, const BacktestReport& report,
                       const std::map<std::string, std::string>& config, const PriceRelativeSeries& series) {
    os << "{\n";
    os << "  \"strategy\": " << quoted(report.strategy) << ",\n";
    os << "  \"config\": ";
    write_config(os, config);
    os << ",\n";
    os << "  \"dataset\": {\"periods\": " << series.rows() << ", \"assets\": " << series.assets()
       << ", \"asset_names\": [";
    for (std::size_t i = 0; i < series.assets(); ++i) os << (i ? ", " : "") << quoted(series.asset_names()[i]);
    os << "]},\n";
    const auto& m = report.metrics;
    os << "  \"metrics\": {\"ret\": " << number(m.ret) << ", \"sharpe\": "
       << (m.sharpe.defined ? number(m.sharpe.value) : "null")
       << ", \"sharpe_status\": " << quoted(m.sharpe.defined ? "defined" : "undefined")
       << ", \"mdd\": " << number(m.mdd) << "},\n";
    os << "  \"solver\": {\"solves\": " << report.total_solves << ", \"flagged\": " << report.flagged_solves
       << "},\n";
    os << "  \"wealth\": [";
    for (std::size_t t = 0; t < report.wealth.values.size(); ++t)
        os << (t ? ", " : "") << number(report.wealth.values[t]);
    os << "],\n";
    os << "  \"portfolios\": [";
    for (std::size_t t = 0; t < report.portfolios.size(); ++t) {
        os << (t ? ",\n    [" : "\n    [");
        const auto w = report.portfolios[t].weights();
        for (std::size_t i = 0; i < w.size(); ++i) os << (i ? ", " : "") << number(w[i]);
        os << "]";
    }
    os << (report.portfolios.empty() ? "]\n" : "\n  ]\n");
    os << "}\n";
}

void write_wealth_csv(std::ostream& os, const BacktestReport& report) {
    os << "period_label,wealth\n";
    for (std::size_t t = 0; t < report.wealth.values.size(); ++t) {
        const auto& label = report.wealth.period_labels[t];
        os << (label.empty() ? std::to_string(t) : label) << ',' << number(report.wealth.values[t]) << '\n';
    }
}

void write_metrics_csv(std::ostream& os, std::span<const BacktestReport> reports) {
    os << "strategy,RET,SR,MDD\n";
    for (const auto& r : reports)
        os << r.strategy << ',' << number(r.metrics.ret) << ',' << format_sharpe(r.metrics.sharpe, -1) << ','
           << number(r.metrics.mdd) << '\n';
}

void print_metrics_table(std::ostream& os, std::span<const BacktestReport> reports) {
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %12s %10s %8s %14s\n", "strategy", "RET", "SR", "MDD", "flagged/solves");
    os << line;
    for (const auto& r : reports) {
        const std::string solves = std::to_string(r.flagged_solves) + "/" + std::to_string(r.total_solves);
        std::snprintf(line, sizeof line, "%-14s %12s %10s %8s %14s\n", r.strategy.c_str(),
                      fixed(r.metrics.ret, 4).c_str(), format_sharpe(r.metrics.sharpe, 2).c_str(),
                      fixed(r.metrics.mdd, 2).c_str(), solves.c_str());
        os << line;
    }
}

}  // namespace racorn
