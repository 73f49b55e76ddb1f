#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "racorn/backtest.hpp"
#include "racorn/ensemble.hpp"
#include "racorn/market_data.hpp"
#include "racorn/parallel.hpp"
#include "racorn/strategy.hpp"

namespace racorn {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every recognised strategy name.
const std::vector<std::string>& known_strategies();

/// Resolved run configuration.
///
/// Stored as text keyed by "section.key"; every key has a default, so an
/// empty file gives the default experiment settings. Values are
/// validated when set. File syntax:
///
///     # comment
///     [ensemble]
///     lambda_grid = 0:0.03:0.01   ; inclusive range lo:hi:step
///     w_grid = 1, 2, 3
class RunConfig {
public:
    RunConfig();

    static RunConfig from_file(const std::filesystem::path& path);
    /// Parses config text; `origin` names the source in error messages.
    static RunConfig from_text(const std::string& text, const std::string& origin = "<config>");

    /// Accepts "section.key" or a bare key that is unique across sections.
    /// Unknown keys raise ConfigError with the closest known key suggested.
    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;

    /// Keys that affect results, sorted; excludes runtime-only settings
    /// (worker count, output directory, SIMD backend).
    std::map<std::string, std::string> provenance() const;
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    std::filesystem::path data_path() const { return get("data.path"); }
    InputMode data_mode() const;
    std::vector<std::string> strategies() const;
    std::size_t workers() const;
    std::filesystem::path output_dir() const { return get("run.out"); }
    std::string simd() const { return get("run.simd"); }

    EnsembleConfig ensemble(EnsembleKind kind) const;
    SolverOptions solver() const;
    MetricOptions metrics() const;
    double eg_eta() const;

    /// Sets the risk-aversion grid of `strategy` to 0..lambda_max step 0.01.
    void set_lambda_max(const std::string& strategy, double lambda_max);

private:
    std::map<std::string, std::string> values_;
};

/// Closest key by edit distance, or empty if nothing is reasonably close.
std::string suggest_key(const std::string& unknown);

/// Parses "a, b, c" or "lo:hi:step".
std::vector<double> parse_grid(const std::string& text);

std::unique_ptr<Strategy> make_strategy(const std::string& name, const RunConfig& config,
                                        WorkerPool* pool = nullptr);

}  // namespace racorn
