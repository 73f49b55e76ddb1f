#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "racorn/market_data.hpp"
#include "racorn/portfolio_opt.hpp"
#include "racorn/strategy.hpp"

namespace racorn {

/// values[0] = 1 and values[t+1] = values[t] * (b_t . x_t).
struct WealthCurve {
    std::vector<double> values;
    std::vector<std::string> period_labels;  // labels[0] is empty (start), then one per period
};

struct SharpeRatio {
    double value = 0.0;    // +/-inf or NaN when undefined
    bool defined = false;  // false when the return deviation is zero
};

struct Metrics {
    double ret = 1.0;
    SharpeRatio sharpe;
    double mdd = 0.0;
};

struct MetricOptions {
    double risk_free_rate = 0.0;  // annual
    double periods_per_year = 252.0;
};

struct BacktestReport {
    std::string strategy;
    WealthCurve wealth;
    std::vector<Portfolio> portfolios;
    Metrics metrics;
    std::size_t flagged_solves = 0;
    std::size_t total_solves = 0;
};

/// Largest peak-to-trough loss, max_t 1 - v_t / max_{s<=t} v_s.
double max_drawdown(std::span<const double> curve);

/// Annualised Sharpe ratio of per-period simple returns with sample
/// standard deviation. A deviation below 1e-14 (relative to the mean
/// magnitude) is treated as zero: the value is then the signed infinity
/// of the mean excess return, or NaN when that is zero, and `defined` is
/// false. Requires at least three curve points (two returns).
SharpeRatio sharpe_ratio(std::span<const double> curve, double annual_risk_free, double periods_per_year);

Metrics compute_metrics(std::span<const double> curve, const MetricOptions& opts = {});

/// Sequential replay. For each period t the strategy sees rows 0..t-1
/// only; row t is revealed after its portfolio is fixed. Requires n >= 2.
BacktestReport run_backtest(const PriceRelativeSeries& series, Strategy& strategy,
                            const MetricOptions& opts = {});

}  // namespace racorn
