#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "racorn/market_data.hpp"
#include "racorn/pattern_match.hpp"

namespace racorn {

/// Long-only allocation: non-negative weights summing to one.
class Portfolio {
public:
    Portfolio() = default;
    /// Clips entries in [-1e-12, 0) to zero (renormalising if any were
    /// clipped). Throws std::logic_error for larger negatives, a sum off by
    /// more than 1e-9, or a non-finite entry.
    explicit Portfolio(std::vector<double> weights);

    static Portfolio uniform(std::size_t m);
    static Portfolio vertex(std::size_t m, std::size_t i);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// b . x
    double growth(std::span<const double> x) const;

    friend bool operator==(const Portfolio&, const Portfolio&) = default;

private:
    std::vector<double> weights_;
};

inline constexpr double kSimplexSumTolerance = 1e-9;
inline constexpr double kNegativeClipTolerance = 1e-12;

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

/// Risk-penalised log-growth over a set of matched price-relative rows:
///
///   value(b) = mean_k log(b . x_k) - lambda * std_k log(b . x_k)
///
/// with the population standard deviation. lambda = 0 is the plain
/// log-optimal (BCRP) objective up to the 1/|C| scale.
class Objective {
public:
    /// `rows` is count x m, row-major. Throws std::invalid_argument when
    /// empty, ragged, non-positive, or lambda < 0.
    Objective(std::vector<double> rows, std::size_t assets, double lambda);

    /// Gathers row j of `series` for every j in `matches`.
    static Objective from_matches(SeriesView series, const MatchSet& matches, double lambda);

    std::size_t count() const noexcept { return count_; }
    std::size_t assets() const noexcept { return assets_; }
    double lambda() const noexcept { return lambda_; }
    std::span<const double> row(std::size_t k) const { return {rows_.data() + k * assets_, assets_}; }
    const std::vector<double>& rows() const noexcept { return rows_; }

    Objective with_lambda(double lambda) const { return Objective(rows_, assets_, lambda); }

private:
    std::vector<double> rows_;
    std::size_t count_ = 0;
    std::size_t assets_ = 0;
    double lambda_ = 0.0;
};

struct Evaluation {
    double value = 0.0;
    double mean_log = 0.0;
    double risk = 0.0;  // unsmoothed population std of log(b . x)
};

/// Throws std::domain_error if b . x <= 0 for some row or a result is not finite.
Evaluation evaluate(const Objective& obj, std::span<const double> b);
inline Evaluation evaluate(const Objective& obj, const Portfolio& b) { return evaluate(obj, b.weights()); }

/// Value and gradient of the objective with risk = sqrt(var + smoothing).
/// With smoothing = 0 this is the exact objective (gradient undefined when
/// the variance is zero and lambda > 0). Valid for any b with b . x > 0,
/// not only simplex points.
struct ValueAndGradient {
    double value = 0.0;
    std::vector<double> gradient;
};
ValueAndGradient objective_gradient(const Objective& obj, std::span<const double> b, double smoothing);

struct SolverOptions {
    double tolerance = 1e-8;              // projected-gradient norm
    double improvement_tolerance = 1e-10;  // relative objective improvement
    int max_iterations = 2000;
    double smoothing = 1e-12;
};

enum class SolveStatus {
    closed_form,      // single row or single asset
    stationary,       // projected-gradient norm below tolerance
    stalled,          // improvement below tolerance or line search exhausted
    iteration_limit,  // budget exhausted; last iterate returned
};

const char* to_string(SolveStatus status);

struct Solution {
    Portfolio portfolio;
    SolveStatus status = SolveStatus::stationary;
    int iterations = 0;
    double gradient_norm = 0.0;

    bool flagged() const noexcept { return status == SolveStatus::iteration_limit; }
};

/// Projected gradient ascent on the simplex from the uniform portfolio.
/// The result is never worse than uniform under evaluate().
Solution optimize(const Objective& obj, const SolverOptions& opts = {});

/// Norm of P(b + grad) - b, zero exactly at a KKT point.
double projected_gradient_norm(std::span<const double> b, std::span<const double> gradient);

struct GridOptimum {
    Portfolio portfolio;
    Evaluation evaluation;
};

/// Exhaustive search over simplex points whose weights are multiples of
/// `step`. Ties go to the lexicographically largest weight vector.
/// Refuses m > 4; `step` must divide 1.
GridOptimum grid_oracle(const Objective& obj, double step);

}  // namespace racorn
