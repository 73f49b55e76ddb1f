// Acceptance suite: one PASS/FAIL/SKIP line per criterion, exit status 1 if
// any criterion fails. Dataset-dependent criteria read the directory named
// by RACORN_DATASET_DIR and are skipped when it is unset or incomplete.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "racorn/backtest.hpp"
#include "racorn/baselines.hpp"
#include "racorn/cli.hpp"
#include "racorn/ensemble.hpp"
#include "racorn/portfolio_opt.hpp"
#include "test_support.hpp"

namespace {

using namespace racorn;
using Clock = std::chrono::steady_clock;

// Thresholds.
constexpr double kReductionTolerance = 1e-12;
constexpr double kReductionSeconds = 10.0;
constexpr double kOracleSlack = 1e-3;
constexpr double kOracleSeconds = 60.0;
constexpr double kGradientRelativeError = 1e-5;
constexpr double kRiskSlack = 1e-3;
constexpr double kUcrpTolerance = 1e-10;
constexpr double kScalingTolerance = 1e-12;
constexpr double kDjiaRetLow = 0.68, kDjiaRetHigh = 0.92;
constexpr double kDjiaMddLow = 0.32, kDjiaMddHigh = 0.44;
constexpr double kMsciRetTarget = 77.54, kMsciRetBand = 0.20;
constexpr double kDjiaGridSeconds = 600.0;

enum class Outcome { pass, fail, skip };

struct Verdict {
    Outcome outcome;
    std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c, d);
    return buf;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double max_weight_gap(const std::vector<Portfolio>& a, const std::vector<Portfolio>& b) {
    double gap = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t)
        for (std::size_t i = 0; i < a[t].size(); ++i) gap = std::max(gap, std::abs(a[t][i] - b[t][i]));
    return gap;
}

PriceRelativeSeries synthetic_fixture() { return test::random_walk(100, 5, 2024, 0.02); }

BacktestReport run(const PriceRelativeSeries& s, EnsembleConfig config) {
    EnsembleStrategy strategy(std::move(config));
    return run_backtest(s, strategy);
}

Verdict reduction_equivalence() {
    const auto start = Clock::now();
    const auto s = synthetic_fixture();
    const auto corn = run(s, EnsembleConfig::defaults(EnsembleKind::corn_k));
    auto rk = EnsembleConfig::defaults(EnsembleKind::racorn_k);
    rk.lambda_grid = {0.0};
    auto rc = EnsembleConfig::defaults(EnsembleKind::racorn_c_k);
    rc.lambda_grid = {0.0};
    const double gap_k = max_weight_gap(corn.portfolios, run(s, rk).portfolios);
    const double gap_c = max_weight_gap(corn.portfolios, run(s, rc).portfolios);
    const double elapsed = seconds_since(start);
    const bool ok = gap_k <= kReductionTolerance && gap_c <= kReductionTolerance && elapsed < kReductionSeconds;
    return {ok ? Outcome::pass : Outcome::fail,
            fmt("max weight gap racorn-k %.3g, racorn-c-k %.3g (limit %.0e); %.2f s", gap_k, gap_c,
                kReductionTolerance, elapsed)};
}

Objective random_objective(std::mt19937_64& rng, std::size_t count, std::size_t m, double lambda) {
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> rows(count * m);
    for (double& v : rows) v = std::exp(noise(rng));
    return Objective(std::move(rows), m, lambda);
}

Verdict optimizer_vs_oracle() {
    const auto start = Clock::now();
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> count(2, 10);
    const double lambdas[] = {0.0, 0.03, 0.1};
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 50; ++k) {
        const std::size_t m = k % 2 == 0 ? 2 : 3;
        const auto obj = random_objective(rng, static_cast<std::size_t>(count(rng)), m, lambdas[k % 3]);
        const double got = evaluate(obj, optimize(obj).portfolio).value;
        const double oracle = grid_oracle(obj, m == 2 ? 0.01 : 0.02).evaluation.value;
        worst = std::min(worst, got - oracle);
    }
    const double elapsed = seconds_since(start);
    const bool ok = worst >= -kOracleSlack && elapsed < kOracleSeconds;
    return {ok ? Outcome::pass : Outcome::fail,
            fmt("50 instances, min(optimizer - grid) = %.3g (limit -%.0e); %.2f s", worst, kOracleSlack, elapsed)};
}

Verdict gradient_check() {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> assets(2, 6), count(2, 12);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const std::size_t m = static_cast<std::size_t>(assets(rng));
        const auto base = random_objective(rng, static_cast<std::size_t>(count(rng)), m, 0.0);
        std::vector<double> b(m);
        double total = 0.0;
        for (double& w : b) total += (w = u(rng));
        for (double& w : b) w /= total;
        for (double lambda : {0.0, 0.05}) {
            const auto obj = base.with_lambda(lambda);
            const auto analytic = objective_gradient(obj, b, 0.0).gradient;
            for (std::size_t i = 0; i < m; ++i) {
                const double h = 1e-6;
                auto up = b, down = b;
                up[i] += h;
                down[i] -= h;
                const double fd =
                    (objective_gradient(obj, up, 0.0).value - objective_gradient(obj, down, 0.0).value) / (2 * h);
                const double scale = std::max({std::abs(analytic[i]), std::abs(fd), 1e-8});
                worst = std::max(worst, std::abs(analytic[i] - fd) / scale);
            }
        }
    }
    return {worst <= kGradientRelativeError ? Outcome::pass : Outcome::fail,
            fmt("20 points x lambda {0, 0.05}, max relative error %.3g (limit %.0e)", worst, kGradientRelativeError)};
}

Verdict risk_monotonicity() {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> count(2, 10);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 20; ++k) {
        const auto plain = random_objective(rng, static_cast<std::size_t>(count(rng)), 2, 0.0);
        const auto averse = plain.with_lambda(0.1);
        const double risk_plain = grid_oracle(plain, 0.01).evaluation.risk;
        const double risk_averse = evaluate(plain, grid_oracle(averse, 0.01).portfolio).risk;
        worst = std::max(worst, risk_averse - risk_plain);
    }
    return {worst <= kRiskSlack ? Outcome::pass : Outcome::fail,
            fmt("20 instances, max(std at lambda 0.1 - std at lambda 0) = %.3g (limit %.0e)", worst, kRiskSlack)};
}

Verdict no_look_ahead() {
    const auto s = synthetic_fixture();
    const std::size_t perturbed[] = {10, 50, 98};
    std::size_t mismatches = 0, checked = 0;
    for (auto kind : {EnsembleKind::corn_k, EnsembleKind::racorn_k, EnsembleKind::racorn_c_k}) {
        const auto base = run(s, EnsembleConfig::defaults(kind));
        for (std::size_t t : perturbed) {
            auto values = s.values();
            for (std::size_t i = 0; i < s.assets(); ++i) values[t * s.assets() + i] *= 1.0 + 0.1 * (i % 2 ? 1 : -1);
            const auto altered = run(PriceRelativeSeries(values, s.asset_names()), EnsembleConfig::defaults(kind));
            for (std::size_t u = 0; u <= t; ++u) {
                ++checked;
                if (!(base.portfolios[u] == altered.portfolios[u])) ++mismatches;
            }
        }
    }
    return {mismatches == 0 ? Outcome::pass : Outcome::fail,
            fmt("%.0f portfolios compared across 3 strategies, %.0f differ", static_cast<double>(checked),
                static_cast<double>(mismatches))};
}

Verdict metrics_suite() {
    std::vector<std::string> failures;
    if (max_drawdown(std::vector<double>{1, 2, 1, 3}) != 0.5) failures.push_back("mdd(1,2,1,3)");
    if (max_drawdown(std::vector<double>{1, 0.5, 0.75, 0.25}) != 0.75) failures.push_back("mdd(1,.5,.75,.25)");

    const auto s = synthetic_fixture();
    UniformRebalanced ucrp;
    const double ret = run_backtest(s, ucrp).metrics.ret;
    double expected = 1.0;
    for (std::size_t t = 0; t < s.rows(); ++t) {
        double mean = 0.0;
        for (std::size_t i = 0; i < s.assets(); ++i) mean += s.at(t, i);
        expected *= mean / static_cast<double>(s.assets());
    }
    const double ucrp_gap = std::abs(ret - expected);
    if (ucrp_gap > kUcrpTolerance) failures.push_back("ucrp");

    std::mt19937_64 rng(14);
    std::normal_distribution<double> step(0.0, 0.03);
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    double scaling_gap = 0.0;
    for (int k = 0; k < 100; ++k) {
        std::vector<double> curve{1.0};
        for (int t = 0; t < 250; ++t) curve.push_back(curve.back() * std::exp(step(rng)));
        auto scaled = curve;
        const double c = scale(rng);
        for (double& v : scaled) v *= c;
        scaling_gap = std::max(scaling_gap, std::abs(max_drawdown(curve) - max_drawdown(scaled)));
    }
    if (scaling_gap > kScalingTolerance) failures.push_back("mdd scaling");

    std::string detail = fmt("mdd fixtures exact; ucrp gap %.3g (limit %.0e); mdd scaling gap %.3g over 100 curves",
                             ucrp_gap, kUcrpTolerance, scaling_gap);
    for (const auto& f : failures) detail += "; failed " + f;
    return {failures.empty() ? Outcome::pass : Outcome::fail, detail};
}

std::string dataset_dir() {
    const char* dir = std::getenv("RACORN_DATASET_DIR");
    return dir == nullptr ? "" : dir;
}

bool datasets_present(const std::string& dir) {
    return !dir.empty() && std::filesystem::exists(std::filesystem::path(dir) / "djia_relatives.csv") &&
           std::filesystem::exists(std::filesystem::path(dir) / "msci_relatives.csv");
}

BacktestReport run_named(const PriceRelativeSeries& s, EnsembleKind kind) {
    return run(s, EnsembleConfig::defaults(kind));
}

Verdict dataset_reproduction() {
    const auto dir = dataset_dir();
    if (!datasets_present(dir)) return {Outcome::skip, "RACORN_DATASET_DIR unset or missing djia/msci files"};
    const auto djia = load_relatives_csv(std::filesystem::path(dir) / "djia_relatives.csv");
    const auto msci = load_relatives_csv(std::filesystem::path(dir) / "msci_relatives.csv");

    const auto start = Clock::now();
    const auto corn = run_named(djia, EnsembleKind::corn_k);
    const auto rk = run_named(djia, EnsembleKind::racorn_k);
    const auto rc = run_named(djia, EnsembleKind::racorn_c_k);
    const double djia_seconds = seconds_since(start);
    const auto msci_corn = run_named(msci, EnsembleKind::corn_k);

    std::vector<std::string> failures;
    const auto& cm = corn.metrics;
    if (cm.ret < kDjiaRetLow || cm.ret > kDjiaRetHigh) failures.push_back("djia corn-k RET");
    if (cm.mdd < kDjiaMddLow || cm.mdd > kDjiaMddHigh) failures.push_back("djia corn-k MDD");
    const double msci_dev = std::abs(msci_corn.metrics.ret / kMsciRetTarget - 1.0);
    if (msci_dev > kMsciRetBand) failures.push_back("msci corn-k RET");
    if (!(rc.metrics.mdd <= cm.mdd)) failures.push_back("racorn-c-k MDD <= corn-k MDD");
    if (!(rc.metrics.sharpe.value >= cm.sharpe.value)) failures.push_back("racorn-c-k SR >= corn-k SR");
    if (djia_seconds >= kDjiaGridSeconds) failures.push_back("djia runtime");

    std::string detail =
        fmt("djia corn-k RET %.4f MDD %.4f; msci corn-k RET %.2f", cm.ret, cm.mdd, msci_corn.metrics.ret) +
        fmt(" (%.1f%% off); racorn-c-k MDD %.4f SR %.4f", 100 * msci_dev, rc.metrics.mdd, rc.metrics.sharpe.value) +
        fmt(" vs corn-k SR %.4f; racorn-k RET %.4f; djia grid %.1f s", cm.sharpe.value, rk.metrics.ret, djia_seconds);
    for (const auto& f : failures) detail += "; failed " + f;
    return {failures.empty() ? Outcome::pass : Outcome::fail, detail};
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism() {
    const auto dir = dataset_dir();
    if (!datasets_present(dir)) return {Outcome::skip, "RACORN_DATASET_DIR unset or missing djia/msci files"};
    test::TempDir scratch;
    const auto data = (std::filesystem::path(dir) / "djia_relatives.csv").string();
    const char* files[] = {"corn-k.report.json", "racorn-k.report.json", "racorn-c-k.report.json", "metrics.csv"};
    for (const char* workers : {"1", "8"}) {
        std::ostringstream out, err;
        const int code = cli::run({"backtest", "--data", data, "--workers", workers, "--out",
                                   (scratch / (std::string("w") + workers)).string()},
                                  out, err);
        if (code != cli::kOk) return {Outcome::fail, "backtest failed: " + err.str()};
    }
    std::size_t differing = 0;
    std::size_t bytes = 0;
    for (const char* f : files) {
        const auto a = slurp(scratch / "w1" / f);
        const auto b = slurp(scratch / "w8" / f);
        bytes += a.size();
        if (a.empty() || a != b) ++differing;
    }
    return {differing == 0 ? Outcome::pass : Outcome::fail,
            fmt("4 report files (%.0f bytes) from 1 and 8 workers, %.0f differ", static_cast<double>(bytes),
                static_cast<double>(differing))};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"reduction equivalence", reduction_equivalence},
        {"optimizer vs grid oracle", optimizer_vs_oracle},
        {"gradient check", gradient_check},
        {"risk monotonicity", risk_monotonicity},
        {"no look-ahead", no_look_ahead},
        {"metrics suite", metrics_suite},
        {"dataset reproduction", dataset_reproduction},
        {"determinism across workers", determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {Outcome::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::fail ? "FAIL" : "SKIP";
        if (v.outcome == Outcome::fail) ++failed;
        std::printf("%s %zu %s: %s\n", tag, k + 1, criteria[k].first.c_str(), v.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
