#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "racorn/market_data.hpp"
#include "racorn/portfolio_opt.hpp"

namespace racorn {

/// Online portfolio strategy driven by the backtest engine.
///
/// For each period t the engine calls decide() with only rows 0..t-1
/// visible, then observe() with row t once the portfolio is fixed.
class Strategy {
public:
    virtual ~Strategy() = default;

    virtual std::string name() const = 0;
    virtual Portfolio decide(SeriesView history) = 0;
    virtual void observe(std::span<const double> relatives) = 0;

    /// Solver runs that hit the iteration budget so far.
    virtual std::size_t flagged_solves() const { return 0; }
    virtual std::size_t total_solves() const { return 0; }
};

}  // namespace racorn
