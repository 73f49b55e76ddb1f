#include <gtest/gtest.h>

#include <cmath>

#include "racorn/backtest.hpp"
#include "racorn/ensemble.hpp"
#include "test_support.hpp"

namespace racorn {
namespace {

EnsembleConfig small_config(EnsembleKind kind) {
    auto c = EnsembleConfig::defaults(kind);
    c.w_grid = {1, 2, 3};
    c.rho_grid = {0.0, 0.2, 0.4};
    if (kind != EnsembleKind::corn_k) c.lambda_grid = {0.0, 0.05, 0.5};
    c.top_fraction = 0.3;
    return c;
}

TEST(UpdateWealth, MultipliesByGrowth) {
    ExpertState s{{1, 0.0, 0.0}, 2.0, Portfolio({0.5, 0.5})};
    s = update_wealth(s, std::vector<double>{1.2, 0.8});
    EXPECT_DOUBLE_EQ(s.wealth, 2.0);
    s = update_wealth(s, std::vector<double>{1.1, 1.1});
    EXPECT_DOUBLE_EQ(s.wealth, 2.2);
    ExpertState empty{{1, 0.0, 0.0}, 1.0, Portfolio{}};
    EXPECT_THROW(update_wealth(empty, std::vector<double>{1.0, 1.0}), std::invalid_argument);
}

TEST(TopCount, CeilingWithFloor) {
    EXPECT_EQ(top_count(50, 0.1), 5u);
    EXPECT_EQ(top_count(51, 0.1), 6u);
    EXPECT_EQ(top_count(3, 0.1), 1u);
    EXPECT_EQ(top_count(200, 0.1), 20u);
    EXPECT_EQ(top_count(4, 1.0), 4u);
}

TEST(TopK, WealthWeightedAverage) {
    const std::vector<ExpertState> experts{{{1, 0.0, 0.0}, 1.0, {}}, {{1, 0.1, 0.0}, 3.0, {}}};
    const std::vector<Portfolio> portfolios{Portfolio::vertex(2, 0), Portfolio::vertex(2, 1)};
    const auto b = topk_combine(experts, portfolios, 1.0);
    EXPECT_DOUBLE_EQ(b[0], 0.25);
    EXPECT_DOUBLE_EQ(b[1], 0.75);
    // Only the richest expert survives a 50% cut.
    EXPECT_EQ(topk_combine(experts, portfolios, 0.5), Portfolio::vertex(2, 1));
}

TEST(TopK, TiesGoToEarlierSpec) {
    const std::vector<ExpertState> experts{
        {{1, 0.0, 0.0}, 2.0, {}}, {{1, 0.1, 0.0}, 2.0, {}}, {{2, 0.0, 0.0}, 1.0, {}}};
    const std::vector<Portfolio> portfolios{Portfolio::vertex(3, 0), Portfolio::vertex(3, 1), Portfolio::vertex(3, 2)};
    EXPECT_EQ(topk_combine(experts, portfolios, 0.2), Portfolio::vertex(3, 0));
}

TEST(ExpertPortfolio, WarmupAndEmptyMatchesAreUniform) {
    const auto s = test::random_walk(10, 3, 4);
    const auto warm = expert_portfolio(s.view().head(2), ExpertSpec{3, 0.0, 0.0});
    EXPECT_TRUE(warm.warmup);
    EXPECT_EQ(warm.portfolio, Portfolio::uniform(3));
    const auto first = expert_portfolio(s.view().head(3), ExpertSpec{3, 0.0, 0.0});
    EXPECT_TRUE(first.no_matches);
    EXPECT_EQ(first.portfolio, Portfolio::uniform(3));
}

TEST(ExpertPortfolio, SolvesOverMatchedRows) {
    const auto s = test::random_walk(60, 4, 6);
    const ExpertSpec spec{2, 0.1, 0.03};
    const auto d = expert_portfolio(s.view().head(50), spec);
    ASSERT_TRUE(d.solved);
    const auto matches = find_matches(s.view().head(50), 50, 2, 0.1);
    const auto direct = optimize(Objective::from_matches(s.view(), matches, 0.03));
    EXPECT_EQ(d.portfolio, direct.portfolio);
}

TEST(CombineLambda, MatchesFrozenFixture) {
    const Objective matched({1.1, 0.95, 0.9, 1.05, 1.2, 1.0}, 2, 0.0);
    const std::vector<Portfolio> per{Portfolio({0.7, 0.3}), Portfolio({0.4, 0.6})};
    const auto u = combine_lambda_experts(matched, per, WeightVariant::unnormalized);
    EXPECT_NEAR(u.weights[0], 0.5127816251576004, 1e-14);
    EXPECT_NEAR(u.weights[1], 0.4872183748423996, 1e-14);
    EXPECT_NEAR(u.portfolio[0], 0.55383448754728004, 1e-14);
    EXPECT_NEAR(u.portfolio[1], 0.44616551245271985, 1e-14);
    const auto n = combine_lambda_experts(matched, per, WeightVariant::normalized);
    EXPECT_NEAR(n.weights[0], 0.50426136696039536, 1e-14);
    EXPECT_NEAR(n.portfolio[0], 0.55127841008811862, 1e-14);
    EXPECT_NEAR(n.portfolio[1], 0.44872158991188132, 1e-14);
}

TEST(CombineLambda, NoOverflowOnLargeMatchSets) {
    // 5000 rows of 1.5 would overflow exp(sum log) without the shift.
    std::vector<double> rows;
    for (int k = 0; k < 5000; ++k) {
        rows.push_back(1.5);
        rows.push_back(1.4);
    }
    const Objective matched(rows, 2, 0.0);
    const std::vector<Portfolio> per{Portfolio::vertex(2, 0), Portfolio::vertex(2, 1)};
    const auto d = combine_lambda_experts(matched, per, WeightVariant::unnormalized);
    EXPECT_NEAR(d.weights[0], 1.0, 1e-12);
    EXPECT_TRUE(std::isfinite(d.portfolio[1]));
}

TEST(RacornCInner, SingletonGridEqualsPlainExpert) {
    const auto s = test::random_walk(80, 4, 13);
    const auto hist = s.view().head(70);
    const std::vector<double> grid{0.05};
    const auto inner = racorn_c_inner(hist, 3, 0.1, grid);
    const auto plain = expert_portfolio(hist, ExpertSpec{3, 0.1, 0.05});
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(inner.portfolio[i], plain.portfolio[i], 1e-15);
    EXPECT_EQ(inner.weights, std::vector<double>{1.0});
}

TEST(RacornCInner, EqualPortfoliosCombineToThatPortfolio) {
    const Objective matched({1.1, 0.95, 0.9, 1.05}, 2, 0.0);
    const std::vector<Portfolio> per(3, Portfolio({0.3, 0.7}));
    const auto d = combine_lambda_experts(matched, per, WeightVariant::unnormalized);
    EXPECT_NEAR(d.portfolio[0], 0.3, 1e-15);
    for (double w : d.weights) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
}

TEST(RacornCInner, WarmupFallsBackToUniform) {
    const auto s = test::random_walk(10, 3, 2);
    const std::vector<double> grid{0.0, 0.1};
    const auto d = racorn_c_inner(s.view().head(1), 2, 0.0, grid);
    EXPECT_TRUE(d.warmup);
    EXPECT_EQ(d.portfolio, Portfolio::uniform(3));
}

TEST(EnsembleStrategy, ExpertCountsFollowGrids) {
    EXPECT_EQ(EnsembleStrategy(EnsembleConfig::defaults(EnsembleKind::corn_k)).experts().size(), 50u);
    EXPECT_EQ(EnsembleStrategy(EnsembleConfig::defaults(EnsembleKind::racorn_k)).experts().size(), 200u);
    EXPECT_EQ(EnsembleStrategy(EnsembleConfig::defaults(EnsembleKind::racorn_c_k)).experts().size(), 50u);
    auto dup = EnsembleConfig::defaults(EnsembleKind::corn_k);
    dup.w_grid = {1, 1};
    EXPECT_THROW(EnsembleStrategy{dup}, std::invalid_argument);
}

TEST(EnsembleStrategy, ExpertsSortedBySpec) {
    EnsembleStrategy s(EnsembleConfig::defaults(EnsembleKind::racorn_k));
    const auto& e = s.experts();
    for (std::size_t k = 1; k < e.size(); ++k) EXPECT_LT(e[k - 1].spec, e[k].spec);
}

TEST(EnsembleStrategy, RejectsInvalidConfig) {
    auto c = EnsembleConfig::defaults(EnsembleKind::racorn_k);
    c.rho_grid = {1.0};
    EXPECT_THROW(EnsembleStrategy{c}, std::invalid_argument);
    c = EnsembleConfig::defaults(EnsembleKind::racorn_k);
    c.top_fraction = 0.0;
    EXPECT_THROW(EnsembleStrategy{c}, std::invalid_argument);
}

TEST(EnsembleStrategy, ZeroLambdaReducesToCorn) {
    const auto s = test::random_walk(40, 3, 17, 0.03);
    EnsembleStrategy corn(small_config(EnsembleKind::corn_k));
    auto rk_cfg = small_config(EnsembleKind::racorn_k);
    rk_cfg.lambda_grid = {0.0};
    EnsembleStrategy rk(rk_cfg);
    auto rc_cfg = small_config(EnsembleKind::racorn_c_k);
    rc_cfg.lambda_grid = {0.0};
    EnsembleStrategy rc(rc_cfg);
    const auto a = run_backtest(s, corn);
    const auto b = run_backtest(s, rk);
    const auto c = run_backtest(s, rc);
    EXPECT_EQ(a.wealth.values, b.wealth.values);
    for (std::size_t t = 0; t < a.wealth.values.size(); ++t)
        EXPECT_NEAR(a.wealth.values[t], c.wealth.values[t], 1e-12 * a.wealth.values[t]);
}

TEST(EnsembleStrategy, NoLookAhead) {
    const auto s = test::random_walk(40, 3, 23, 0.03);
    auto values = s.values();
    for (std::size_t k = 25 * 3; k < values.size(); ++k) values[k] = 1.0 / values[k];
    const PriceRelativeSeries altered(values, s.asset_names());
    for (auto kind : {EnsembleKind::corn_k, EnsembleKind::racorn_k, EnsembleKind::racorn_c_k}) {
        EnsembleStrategy a(small_config(kind)), b(small_config(kind));
        const auto ra = run_backtest(s, a);
        const auto rb = run_backtest(altered, b);
        for (std::size_t t = 0; t <= 25; ++t) EXPECT_EQ(ra.portfolios[t], rb.portfolios[t]) << to_string(kind) << " t=" << t;
    }
}

TEST(EnsembleStrategy, IdenticalAcrossWorkerCounts) {
    const auto s = test::random_walk(50, 4, 29, 0.03);
    for (auto kind : {EnsembleKind::corn_k, EnsembleKind::racorn_k, EnsembleKind::racorn_c_k}) {
        EnsembleStrategy serial(small_config(kind));
        WorkerPool pool(4);
        EnsembleStrategy parallel(small_config(kind), &pool);
        const auto a = run_backtest(s, serial);
        const auto b = run_backtest(s, parallel);
        EXPECT_EQ(a.wealth.values, b.wealth.values) << to_string(kind);
        EXPECT_EQ(a.total_solves, b.total_solves);
    }
}

TEST(WorkerPool, RunsEveryIndexOnceAndPropagatesErrors) {
    WorkerPool pool(3);
    std::vector<int> hits(1000, 0);
    pool.parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(pool.parallel_for(50, [](std::size_t i) {
        if (i == 17) throw std::runtime_error("boom");
    }), std::runtime_error);
    pool.parallel_for(10, [&](std::size_t i) { hits[i] += 1; });  // still usable
    EXPECT_EQ(hits[9], 2);
}

TEST(Grids, LinearGridLandsOnDecimals) {
    const auto g = linear_grid(0.0, 0.9, 0.1);
    ASSERT_EQ(g.size(), 10u);
    EXPECT_EQ(g[3], 0.3);
    EXPECT_EQ(g[9], 0.9);
    EXPECT_EQ(linear_grid(0.0, 0.03, 0.01).size(), 4u);
    EXPECT_EQ(linear_grid(0.0, 0.1, 0.01).size(), 11u);
}

}  // namespace
}  // namespace racorn
