#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>

#include "racorn/backtest.hpp"
#include "racorn/market_data.hpp"

namespace racorn {

/// Machine-readable report: strategy, resolved config, dataset shape,
/// metrics, solver counters, wealth curve and every portfolio. Numbers use
/// 17 significant digits; key order is fixed, so identical runs produce
/// identical bytes.
void write_report_json(std::ostream& os, const BacktestReport& report,
                       const std::map<std::string, std::string>& config, const PriceRelativeSeries& series);

/// period_label,wealth rows; the first row is the starting wealth of 1.
void write_wealth_csv(std::ostream& os, const BacktestReport& report);

/// strategy,RET,SR,MDD with full precision (SR "undefined" when undefined).
void write_metrics_csv(std::ostream& os, std::span<const BacktestReport> reports);

/// Fixed-width table for terminals.
void print_metrics_table(std::ostream& os, std::span<const BacktestReport> reports);

std::string format_sharpe(const SharpeRatio& sr, int precision);

}  // namespace racorn
