#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "racorn/market_data.hpp"
#include "racorn/parallel.hpp"
#include "racorn/pattern_match.hpp"
#include "racorn/portfolio_opt.hpp"
#include "racorn/strategy.hpp"

namespace racorn {

/// One pattern-matching expert: window width, correlation threshold and
/// risk aversion (zero for plain CORN experts). Ordered lexicographically,
/// which is also the tie-break order when ranking by wealth.
struct ExpertSpec {
    std::size_t w = 1;
    double rho = 0.0;
    double lambda = 0.0;

    void validate() const;
    auto operator<=>(const ExpertSpec&) const = default;
};

struct ExpertState {
    ExpertSpec spec;
    double wealth = 1.0;
    Portfolio last_portfolio;
};

enum class EnsembleKind { corn_k, racorn_k, racorn_c_k };

/// How the conservative variant weights its lambda experts: exp of the
/// summed log growth over the matched rows, or of its mean.
enum class WeightVariant { unnormalized, normalized };

const char* to_string(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(const std::string& text);
const char* to_string(WeightVariant variant);
WeightVariant parse_weight_variant(const std::string& text);

struct EnsembleConfig {
    EnsembleKind kind = EnsembleKind::corn_k;
    std::vector<std::size_t> w_grid;
    std::vector<double> rho_grid;
    std::vector<double> lambda_grid;  // ignored by CORN-K
    double top_fraction = 0.10;
    WeightVariant variant = WeightVariant::unnormalized;
    SolverOptions solver;

    /// Default grids: w in 1..5, rho in
    /// 0.0..0.9 step 0.1, lambda in 0..0.03 (RACORN-K) or 0..0.1
    /// (RACORN(C)-K) step 0.01, top 10% of experts.
    static EnsembleConfig defaults(EnsembleKind kind);

    void validate() const;
};

/// Evenly spaced values lo, lo+step, ..., hi (inclusive, computed as
/// lo + k*step and rounded to 12 decimals so 0.1-steps land on 0.3 etc.).
std::vector<double> linear_grid(double lo, double hi, double step);

/// max(1, ceil(fraction * n)).
std::size_t top_count(std::size_t n, double fraction);

struct ExpertDecision {
    Portfolio portfolio;
    bool warmup = false;     // window not yet formed
    bool no_matches = false;  // empty match set, uniform fallback
    SolveStatus status = SolveStatus::closed_form;
    bool solved = false;
};

/// Portfolio of one expert at period t = history.rows().
ExpertDecision expert_portfolio(SeriesView history, const ExpertSpec& spec, const SolverOptions& opts = {});

/// Same, with the window correlations of width spec.w already computed.
ExpertDecision expert_portfolio(SeriesView history, std::span<const double> correlations,
                                const ExpertSpec& spec, const SolverOptions& opts);

ExpertState update_wealth(ExpertState state, std::span<const double> relatives);

/// Wealth-weighted average of the top experts by wealth.
Portfolio topk_combine(std::span<const ExpertState> experts, std::span<const Portfolio> portfolios,
                       double top_fraction);

/// Inner layer of the conservative variant for one (w, rho): one solve per
/// lambda, combined with weights exp(sum_j log(b_lambda . x_j)) (or the
/// mean, for WeightVariant::normalized). Weights are computed relative to
/// the largest exponent, which leaves the normalised combination unchanged.
struct InnerDecision {
    Portfolio portfolio;
    std::vector<Portfolio> per_lambda;
    std::vector<double> weights;  // normalised, one per lambda
    bool warmup = false;
    bool no_matches = false;
    std::size_t flagged = 0;
    std::size_t solves = 0;
};

InnerDecision racorn_c_inner(SeriesView history, std::size_t w, double rho, std::span<const double> lambda_grid,
                             WeightVariant variant = WeightVariant::unnormalized,
                             const SolverOptions& opts = {});

/// Combines per-lambda portfolios for a fixed match objective.
InnerDecision combine_lambda_experts(const Objective& matched, std::span<const Portfolio> per_lambda,
                                     WeightVariant variant);

/// CORN-K, RACORN-K and RACORN(C)-K as online strategies.
class EnsembleStrategy final : public Strategy {
public:
    /// `pool` may be null (sequential) and must outlive the strategy.
    explicit EnsembleStrategy(EnsembleConfig config, WorkerPool* pool = nullptr);

    std::string name() const override;
    Portfolio decide(SeriesView history) override;
    void observe(std::span<const double> relatives) override;

    std::size_t flagged_solves() const override { return flagged_; }
    std::size_t total_solves() const override { return solves_; }

    const EnsembleConfig& config() const noexcept { return config_; }
    /// Experts whose wealth drives the top-k selection: (w, rho) for CORN-K
    /// and RACORN(C)-K, (w, rho, lambda) for RACORN-K. Sorted by spec.
    const std::vector<ExpertState>& experts() const noexcept { return experts_; }

private:
    EnsembleConfig config_;
    WorkerPool* pool_;
    std::vector<ExpertState> experts_;
    std::size_t flagged_ = 0;
    std::size_t solves_ = 0;
};

}  // namespace racorn
