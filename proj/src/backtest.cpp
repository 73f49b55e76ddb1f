#include "racorn/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace racorn {

double max_drawdown(std::span<const double> curve) {
    double peak = 0.0;
    double worst = 0.0;
    for (double v : curve) {
        if (!(v > 0.0)) throw std::invalid_argument("wealth curve must be strictly positive");
        peak = std::max(peak, v);
        worst = std::max(worst, 1.0 - v / peak);
    }
    return worst;
}

SharpeRatio sharpe_ratio(std::span<const double> curve, double annual_risk_free, double periods_per_year) {
    if (curve.size() < 3) throw std::invalid_argument("sharpe ratio needs at least two returns");
    if (!(periods_per_year > 0.0)) throw std::invalid_argument("periods_per_year must be positive");
    const std::size_t n = curve.size() - 1;
    const double rf = annual_risk_free / periods_per_year;

    std::vector<double> excess(n);
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        excess[t] = curve[t + 1] / curve[t] - 1.0 - rf;
        total += excess[t];
    }
    const double mean = total / static_cast<double>(n);
    double ss = 0.0;
    for (double r : excess) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    SharpeRatio out;
    if (sd <= 1e-14 * std::max(1.0, std::abs(mean))) {
        out.defined = false;
        if (mean > 0.0) {
            out.value = std::numeric_limits<double>::infinity();
        } else if (mean < 0.0) {
            out.value = -std::numeric_limits<double>::infinity();
        } else {
            out.value = std::numeric_limits<double>::quiet_NaN();
        }
        return out;
    }
    out.defined = true;
    out.value = mean / sd * std::sqrt(periods_per_year);
    return out;
}

Metrics compute_metrics(std::span<const double> curve, const MetricOptions& opts) {
    Metrics m;
    m.ret = curve.back();
    m.mdd = max_drawdown(curve);
    m.sharpe = sharpe_ratio(curve, opts.risk_free_rate, opts.periods_per_year);
    return m;
}

BacktestReport run_backtest(const PriceRelativeSeries& series, Strategy& strategy, const MetricOptions& opts) {
    const std::size_t n = series.rows();
    const std::size_t m = series.assets();
    if (n < 2) throw std::invalid_argument("backtest needs at least two periods");

    BacktestReport report;
    report.strategy = strategy.name();
    report.portfolios.reserve(n);
    report.wealth.values.reserve(n + 1);
    report.wealth.values.push_back(1.0);
    report.wealth.period_labels.reserve(n + 1);
    report.wealth.period_labels.emplace_back();

    const SeriesView full = series.view();
    double wealth = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        Portfolio b = strategy.decide(full.head(t));
        if (b.size() != m) throw std::logic_error("strategy returned a portfolio of the wrong size at period " +
                                                  std::to_string(t));
        const auto x = series.row(t);
        const double growth = b.growth(x);
        if (!(growth > 0.0) || !std::isfinite(growth))
            throw std::runtime_error("non-positive portfolio growth at period " + std::to_string(t));
        wealth *= growth;
        strategy.observe(x);
        report.portfolios.push_back(std::move(b));
        report.wealth.values.push_back(wealth);
        report.wealth.period_labels.push_back(series.period_labels()[t]);
    }
    report.metrics = compute_metrics(report.wealth.values, opts);
    report.flagged_solves = strategy.flagged_solves();
    report.total_solves = strategy.total_solves();
    return report;
}

}  // namespace racorn
