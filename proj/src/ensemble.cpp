#include "racorn/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace racorn {

void ExpertSpec::validate() const {
    if (w < 1) throw std::invalid_argument("expert window width must be at least 1");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("expert correlation threshold must lie in [0, 1)");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("expert risk aversion must be finite and non-negative");
}

const char* to_string(EnsembleKind kind) {
    switch (kind) {
        case EnsembleKind::corn_k: return "corn-k";
        case EnsembleKind::racorn_k: return "racorn-k";
        case EnsembleKind::racorn_c_k: return "racorn-c-k";
    }
    return "unknown";
}

EnsembleKind parse_ensemble_kind(const std::string& text) {
    if (text == "corn-k") return EnsembleKind::corn_k;
    if (text == "racorn-k") return EnsembleKind::racorn_k;
    if (text == "racorn-c-k") return EnsembleKind::racorn_c_k;
    throw std::invalid_argument("unknown ensemble strategy '" + text + "'");
}

const char* to_string(WeightVariant variant) {
    return variant == WeightVariant::normalized ? "normalized" : "unnormalized";
}

WeightVariant parse_weight_variant(const std::string& text) {
    if (text == "unnormalized") return WeightVariant::unnormalized;
    if (text == "normalized") return WeightVariant::normalized;
    throw std::invalid_argument("unknown weight variant '" + text + "' (expected unnormalized or normalized)");
}

std::vector<double> linear_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("linear_grid needs step > 0 and hi >= lo");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12;
    return out;
}

std::size_t top_count(std::size_t n, double fraction) {
    const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

EnsembleConfig EnsembleConfig::defaults(EnsembleKind kind) {
    EnsembleConfig c;
    c.kind = kind;
    c.w_grid = {1, 2, 3, 4, 5};
    c.rho_grid = linear_grid(0.0, 0.9, 0.1);
    switch (kind) {
        case EnsembleKind::corn_k: c.lambda_grid = {0.0}; break;
        case EnsembleKind::racorn_k: c.lambda_grid = linear_grid(0.0, 0.03, 0.01); break;
        case EnsembleKind::racorn_c_k: c.lambda_grid = linear_grid(0.0, 0.1, 0.01); break;
    }
    return c;
}

void EnsembleConfig::validate() const {
    if (w_grid.empty() || rho_grid.empty()) throw std::invalid_argument("window and threshold grids must be non-empty");
    if (kind != EnsembleKind::corn_k && lambda_grid.empty())
        throw std::invalid_argument("risk-aversion grid must be non-empty");
    if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw std::invalid_argument("top_fraction must lie in (0, 1]");
    for (auto w : w_grid)
        for (double rho : rho_grid)
            for (double lambda : lambda_grid) ExpertSpec{w, rho, lambda}.validate();
    if (solver.max_iterations < 1) throw std::invalid_argument("solver max_iterations must be positive");
    if (!(solver.tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    if (!(solver.smoothing >= 0.0)) throw std::invalid_argument("solver smoothing must be non-negative");
}

// ---------------------------------------------------------------------------

ExpertDecision expert_portfolio(SeriesView history, std::span<const double> correlations, const ExpertSpec& spec,
                                const SolverOptions& opts) {
    const std::size_t t = history.rows();
    const std::size_t m = history.assets();
    ExpertDecision d;
    if (t < spec.w) {
        d.portfolio = Portfolio::uniform(m);
        d.warmup = true;
        return d;
    }
    const auto matches = select_matches(correlations, t, spec.w, spec.rho);
    if (matches.empty()) {
        d.portfolio = Portfolio::uniform(m);
        d.no_matches = true;
        return d;
    }
    auto sol = optimize(Objective::from_matches(history, matches, spec.lambda), opts);
    d.portfolio = std::move(sol.portfolio);
    d.status = sol.status;
    d.solved = true;
    return d;
}

ExpertDecision expert_portfolio(SeriesView history, const ExpertSpec& spec, const SolverOptions& opts) {
    spec.validate();
    const std::size_t t = history.rows();
    if (t < spec.w) return expert_portfolio(history, std::span<const double>{}, spec, opts);
    const auto corr = window_correlations(history, t, spec.w);
    return expert_portfolio(history, corr, spec, opts);
}

ExpertState update_wealth(ExpertState state, std::span<const double> relatives) {
    if (state.last_portfolio.size() != relatives.size())
        throw std::invalid_argument("update_wealth: expert has no portfolio for this period");
    state.wealth *= state.last_portfolio.growth(relatives);
    return state;
}

Portfolio topk_combine(std::span<const ExpertState> experts, std::span<const Portfolio> portfolios,
                       double top_fraction) {
    if (experts.empty()) throw std::invalid_argument("topk_combine: no experts");
    if (portfolios.size() != experts.size()) throw std::invalid_argument("topk_combine: one portfolio per expert");
    const std::size_t m = portfolios.front().size();

    std::vector<std::size_t> order(experts.size());
    std::iota(order.begin(), order.end(), 0);
    // Experts are kept in spec order, so a stable sort breaks wealth ties
    // lexicographically on (w, rho, lambda).
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return experts[a].wealth > experts[b].wealth; });
    const std::size_t k = top_count(experts.size(), top_fraction);
    std::vector<bool> selected(experts.size(), false);
    for (std::size_t r = 0; r < k; ++r) selected[order[r]] = true;

    std::vector<double> numerator(m, 0.0);
    double denominator = 0.0;
    for (std::size_t e = 0; e < experts.size(); ++e) {
        if (!selected[e]) continue;
        const double s = experts[e].wealth;
        if (portfolios[e].size() != m) throw std::invalid_argument("topk_combine: portfolio size mismatch");
        for (std::size_t i = 0; i < m; ++i) numerator[i] += s * portfolios[e][i];
        denominator += s;
    }
    if (!(denominator > 0.0)) throw std::logic_error("topk_combine: selected experts have no wealth");
    for (double& x : numerator) x /= denominator;
    return Portfolio(std::move(numerator));
}

InnerDecision combine_lambda_experts(const Objective& matched, std::span<const Portfolio> per_lambda,
                                     WeightVariant variant) {
    if (per_lambda.empty()) throw std::invalid_argument("combine_lambda_experts: empty lambda grid");
    const std::size_t m = matched.assets();
    const double scale = variant == WeightVariant::unnormalized ? static_cast<double>(matched.count()) : 1.0;

    std::vector<double> exponent(per_lambda.size());
    for (std::size_t l = 0; l < per_lambda.size(); ++l)
        exponent[l] = scale * evaluate(matched, per_lambda[l]).mean_log;
    const double top = *std::max_element(exponent.begin(), exponent.end());

    InnerDecision d;
    d.per_lambda.assign(per_lambda.begin(), per_lambda.end());
    d.weights.resize(per_lambda.size());
    double total = 0.0;
    for (std::size_t l = 0; l < per_lambda.size(); ++l) {
        d.weights[l] = std::exp(exponent[l] - top);
        total += d.weights[l];
    }
    if (!(total > 0.0) || !std::isfinite(total)) throw std::logic_error("lambda expert weights degenerate");
    std::vector<double> combined(m, 0.0);
    for (std::size_t l = 0; l < per_lambda.size(); ++l)
        for (std::size_t i = 0; i < m; ++i) combined[i] += d.weights[l] * per_lambda[l][i];
    for (double& x : combined) x /= total;
    for (double& w : d.weights) w /= total;
    d.portfolio = Portfolio(std::move(combined));
    return d;
}

InnerDecision racorn_c_inner(SeriesView history, std::size_t w, double rho, std::span<const double> lambda_grid,
                             WeightVariant variant, const SolverOptions& opts) {
    if (lambda_grid.empty()) throw std::invalid_argument("racorn_c_inner: empty lambda grid");
    for (double lambda : lambda_grid) ExpertSpec{w, rho, lambda}.validate();
    const std::size_t t = history.rows();
    const std::size_t m = history.assets();
    const auto uniform_decision = [&](bool warmup) {
        InnerDecision d;
        d.portfolio = Portfolio::uniform(m);
        d.per_lambda.assign(lambda_grid.size(), d.portfolio);
        d.weights.assign(lambda_grid.size(), 1.0 / static_cast<double>(lambda_grid.size()));
        d.warmup = warmup;
        d.no_matches = !warmup;
        return d;
    };
    if (t < w) return uniform_decision(true);
    const auto matches = find_matches(history, t, w, rho);
    if (matches.empty()) return uniform_decision(false);

    const auto matched = Objective::from_matches(history, matches, 0.0);
    std::vector<Portfolio> per_lambda;
    std::size_t flagged = 0;
    for (double lambda : lambda_grid) {
        auto sol = optimize(matched.with_lambda(lambda), opts);
        flagged += sol.flagged() ? 1 : 0;
        per_lambda.push_back(std::move(sol.portfolio));
    }
    auto d = combine_lambda_experts(matched, per_lambda, variant);
    d.flagged = flagged;
    d.solves = lambda_grid.size();
    return d;
}

// ---------------------------------------------------------------------------

EnsembleStrategy::EnsembleStrategy(EnsembleConfig config, WorkerPool* pool)
    : config_(std::move(config)), pool_(pool) {
    config_.validate();
    if (config_.kind == EnsembleKind::corn_k) config_.lambda_grid = {0.0};

    std::vector<ExpertSpec> specs;
    for (auto w : config_.w_grid)
        for (double rho : config_.rho_grid) {
            if (config_.kind == EnsembleKind::racorn_k) {
                for (double lambda : config_.lambda_grid) specs.push_back({w, rho, lambda});
            } else {
                specs.push_back({w, rho, 0.0});
            }
        }
    std::sort(specs.begin(), specs.end());
    if (std::adjacent_find(specs.begin(), specs.end()) != specs.end())
        throw std::invalid_argument("duplicate values in the expert grids");

    const std::size_t expected = config_.w_grid.size() * config_.rho_grid.size() *
                                 (config_.kind == EnsembleKind::racorn_k ? config_.lambda_grid.size() : 1);
    if (specs.size() != expected) throw std::logic_error("expert count does not match the grid sizes");

    for (const auto& s : specs) experts_.push_back({s, 1.0, Portfolio{}});
}

std::string EnsembleStrategy::name() const { return to_string(config_.kind); }

Portfolio EnsembleStrategy::decide(SeriesView history) {
    const std::size_t t = history.rows();
    const std::size_t m = history.assets();

    std::vector<std::size_t> widths = config_.w_grid;
    std::sort(widths.begin(), widths.end());
    std::vector<std::vector<double>> corr(widths.size());
    const auto run = [&](std::size_t n, const std::function<void(std::size_t)>& body) {
        if (pool_ != nullptr) {
            pool_->parallel_for(n, body);
        } else {
            for (std::size_t i = 0; i < n; ++i) body(i);
        }
    };
    run(widths.size(), [&](std::size_t k) {
        if (t >= widths[k]) corr[k] = window_correlations(history, t, widths[k]);
    });
    const auto correlations_for = [&](std::size_t w) -> std::span<const double> {
        const auto it = std::lower_bound(widths.begin(), widths.end(), w);
        return corr[static_cast<std::size_t>(it - widths.begin())];
    };

    const std::size_t n_experts = experts_.size();
    std::vector<Portfolio> portfolios(n_experts);

    if (config_.kind != EnsembleKind::racorn_c_k) {
        std::vector<ExpertDecision> decisions(n_experts);
        run(n_experts, [&](std::size_t e) {
            const auto& spec = experts_[e].spec;
            decisions[e] = expert_portfolio(history, correlations_for(spec.w), spec, config_.solver);
        });
        for (std::size_t e = 0; e < n_experts; ++e) {
            if (decisions[e].solved) {
                ++solves_;
                if (decisions[e].status == SolveStatus::iteration_limit) ++flagged_;
            }
            portfolios[e] = std::move(decisions[e].portfolio);
        }
    } else {
        // Match objectives per (w, rho), then one solve per (expert, lambda).
        std::vector<std::optional<Objective>> matched(n_experts);
        run(n_experts, [&](std::size_t e) {
            const auto& spec = experts_[e].spec;
            if (t < spec.w) return;
            const auto matches = select_matches(correlations_for(spec.w), t, spec.w, spec.rho);
            if (!matches.empty()) matched[e] = Objective::from_matches(history, matches, 0.0);
        });
        const std::size_t n_lambda = config_.lambda_grid.size();
        std::vector<Solution> solutions(n_experts * n_lambda);
        run(n_experts * n_lambda, [&](std::size_t job) {
            const std::size_t e = job / n_lambda;
            if (!matched[e]) return;
            solutions[job] = optimize(matched[e]->with_lambda(config_.lambda_grid[job % n_lambda]), config_.solver);
        });
        for (std::size_t e = 0; e < n_experts; ++e) {
            if (!matched[e]) {
                portfolios[e] = Portfolio::uniform(m);
                continue;
            }
            std::vector<Portfolio> per_lambda;
            per_lambda.reserve(n_lambda);
            for (std::size_t l = 0; l < n_lambda; ++l) {
                auto& sol = solutions[e * n_lambda + l];
                ++solves_;
                if (sol.flagged()) ++flagged_;
                per_lambda.push_back(std::move(sol.portfolio));
            }
            portfolios[e] = combine_lambda_experts(*matched[e], per_lambda, config_.variant).portfolio;
        }
    }

    auto master = topk_combine(experts_, portfolios, config_.top_fraction);
    for (std::size_t e = 0; e < n_experts; ++e) experts_[e].last_portfolio = std::move(portfolios[e]);
    return master;
}

void EnsembleStrategy::observe(std::span<const double> relatives) {
    for (auto& expert : experts_) expert = update_wealth(std::move(expert), relatives);
}

}  // namespace racorn
