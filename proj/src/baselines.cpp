#include "racorn/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace racorn {

namespace {

void normalise(std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
}

}  // namespace

Portfolio BuyAndHold::decide(SeriesView history) {
    if (weights_.empty()) weights_.assign(history.assets(), 1.0 / static_cast<double>(history.assets()));
    return Portfolio(weights_);
}

void BuyAndHold::observe(std::span<const double> relatives) {
    if (relatives.size() != weights_.size()) throw std::invalid_argument("ubah: asset count changed");
    for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] *= relatives[i];
    normalise(weights_);
}

ExponentiatedGradient::ExponentiatedGradient(double eta) : eta_(eta) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eg: learning rate must be >= 0");
}

Portfolio ExponentiatedGradient::decide(SeriesView history) {
    if (weights_.empty()) weights_.assign(history.assets(), 1.0 / static_cast<double>(history.assets()));
    return Portfolio(weights_);
}

void ExponentiatedGradient::observe(std::span<const double> relatives) {
    if (relatives.size() != weights_.size()) throw std::invalid_argument("eg: asset count changed");
    if (eta_ == 0.0) return;
    double growth = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) growth += weights_[i] * relatives[i];
    for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] *= std::exp(eta_ * relatives[i] / growth);
    normalise(weights_);
}

}  // namespace racorn
