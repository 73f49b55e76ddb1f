#pragma once

#include <span>
#include <string>
#include <vector>

#include "racorn/strategy.hpp"

namespace racorn {

/// Uniform buy-and-hold: buys 1/m of each asset once, then lets the
/// weights drift with prices.
class BuyAndHold final : public Strategy {
public:
    std::string name() const override { return "ubah"; }
    Portfolio decide(SeriesView history) override;
    void observe(std::span<const double> relatives) override;

private:
    std::vector<double> weights_;
};

/// Uniform constant rebalanced portfolio.
class UniformRebalanced final : public Strategy {
public:
    std::string name() const override { return "ucrp"; }
    Portfolio decide(SeriesView history) override { return Portfolio::uniform(history.assets()); }
    void observe(std::span<const double>) override {}
};

/// Exponentiated gradient: b_i <- b_i exp(eta x_i / (b . x)), renormalised.
class ExponentiatedGradient final : public Strategy {
public:
    explicit ExponentiatedGradient(double eta = 0.05);
    std::string name() const override { return "eg"; }
    Portfolio decide(SeriesView history) override;
    void observe(std::span<const double> relatives) override;

private:
    double eta_;
    std::vector<double> weights_;
};

}  // namespace racorn
