#include "racorn/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "racorn/baselines.hpp"
#include "racorn/kernels.hpp"

namespace racorn {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, sep)) out.push_back(trim(cell));
    if (!text.empty() && text.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& text) {
    double v = 0.0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError("'" + text + "' is not a number");
    return v;
}

long parse_integer(const std::string& text) {
    long v = 0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("'" + text + "' is not an integer");
    return v;
}

std::vector<std::string> parse_strategy_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto& s : split(text, ',')) {
        if (s.empty()) continue;
        const auto& known = known_strategies();
        if (std::find(known.begin(), known.end(), s) == known.end())
            throw ConfigError("unknown strategy '" + s + "'");
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    if (out.empty()) throw ConfigError("strategy list is empty");
    return out;
}

struct KeySpec {
    const char* key;
    const char* fallback;
    std::function<void(const std::string&)> check;
};

void check_positive_double(const std::string& v) {
    if (!(parse_double(v) > 0.0)) throw ConfigError("value must be positive");
}
void check_nonneg_double(const std::string& v) {
    if (!(parse_double(v) >= 0.0)) throw ConfigError("value must be non-negative");
}

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = {
        {"data.path", "", [](const std::string&) {}},
        {"data.mode", "relatives", [](const std::string& v) { parse_input_mode(v); }},
        {"run.strategies", "corn-k, racorn-k, racorn-c-k", [](const std::string& v) { parse_strategy_list(v); }},
        {"run.workers", "1",
         [](const std::string& v) {
             if (parse_integer(v) < 1) throw ConfigError("workers must be at least 1");
         }},
        {"run.out", "out", [](const std::string&) {}},
        {"run.simd", "auto", [](const std::string& v) { kernels::parse_backend(v); }},
        {"ensemble.w_grid", "1:5:1",
         [](const std::string& v) {
             for (double w : parse_grid(v))
                 if (w < 1 || w != std::floor(w)) throw ConfigError("window widths must be positive integers");
         }},
        {"ensemble.rho_grid", "0:0.9:0.1",
         [](const std::string& v) {
             for (double r : parse_grid(v))
                 if (!(r >= 0.0 && r < 1.0)) throw ConfigError("thresholds must lie in [0, 1)");
         }},
        {"ensemble.lambda_grid", "0:0.03:0.01",
         [](const std::string& v) {
             for (double l : parse_grid(v))
                 if (l < 0.0) throw ConfigError("risk aversion must be non-negative");
         }},
        {"ensemble.lambda_grid_c", "0:0.1:0.01",
         [](const std::string& v) {
             for (double l : parse_grid(v))
                 if (l < 0.0) throw ConfigError("risk aversion must be non-negative");
         }},
        {"ensemble.top_fraction", "0.1",
         [](const std::string& v) {
             const double f = parse_double(v);
             if (!(f > 0.0 && f <= 1.0)) throw ConfigError("top_fraction must lie in (0, 1]");
         }},
        {"ensemble.weight_variant", "unnormalized", [](const std::string& v) { parse_weight_variant(v); }},
        {"solver.tolerance", "1e-8", check_positive_double},
        {"solver.improvement_tolerance", "1e-10", check_nonneg_double},
        {"solver.max_iterations", "2000",
         [](const std::string& v) {
             if (parse_integer(v) < 1) throw ConfigError("max_iterations must be at least 1");
         }},
        {"solver.smoothing", "1e-12", check_nonneg_double},
        {"metrics.risk_free_rate", "0", [](const std::string& v) { parse_double(v); }},
        {"metrics.periods_per_year", "252", check_positive_double},
        {"baselines.eg_eta", "0.05", check_nonneg_double},
    };
    return specs;
}

const KeySpec* find_spec(const std::string& key) {
    for (const auto& s : key_specs())
        if (key == s.key) return &s;
    return nullptr;
}

std::string bare(const std::string& key) {
    const auto dot = key.find('.');
    return dot == std::string::npos ? key : key.substr(dot + 1);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::vector<std::size_t> parse_width_grid(const std::string& text) {
    std::vector<std::size_t> out;
    for (double w : parse_grid(text)) out.push_back(static_cast<std::size_t>(w));
    return out;
}

}  // namespace

const std::vector<std::string>& known_strategies() {
    static const std::vector<std::string> names = {"corn-k", "racorn-k", "racorn-c-k", "ubah", "ucrp", "eg"};
    return names;
}

std::vector<double> parse_grid(const std::string& text) {
    const auto t = trim(text);
    if (t.empty()) throw ConfigError("empty grid");
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() != 3) throw ConfigError("range grids are written lo:hi:step, got '" + text + "'");
        const double lo = parse_double(parts[0]);
        const double hi = parse_double(parts[1]);
        const double step = parse_double(parts[2]);
        if (!(step > 0.0) || hi < lo) throw ConfigError("range grid '" + text + "' needs step > 0 and hi >= lo");
        return linear_grid(lo, hi, step);
    }
    std::vector<double> out;
    for (const auto& cell : split(t, ',')) out.push_back(parse_double(cell));
    return out;
}

std::string suggest_key(const std::string& unknown) {
    const std::string probe = bare(unknown);
    std::string best;
    std::size_t best_d = std::string::npos;
    for (const auto& s : key_specs()) {
        const std::string candidate = bare(s.key);
        const std::size_t d = edit_distance(probe, candidate);
        if (d < best_d) {
            best_d = d;
            best = candidate;
        }
    }
    if (best_d > std::max<std::size_t>(2, probe.size() / 3)) return {};
    return best;
}

RunConfig::RunConfig() {
    for (const auto& s : key_specs()) values_[s.key] = s.fallback;
}

void RunConfig::set(const std::string& key_in, const std::string& value_in) {
    const std::string key = trim(key_in);
    const std::string value = trim(value_in);
    std::string full = key;
    if (key.find('.') == std::string::npos) {
        std::vector<std::string> hits;
        for (const auto& s : key_specs())
            if (bare(s.key) == key) hits.emplace_back(s.key);
        if (hits.size() == 1) full = hits.front();
    }
    const KeySpec* spec = find_spec(full);
    if (spec == nullptr) {
        std::string msg = "unknown config key '" + key + "'";
        if (const auto hint = suggest_key(key); !hint.empty()) msg += "; did you mean '" + hint + "'?";
        throw ConfigError(msg);
    }
    try {
        spec->check(value);
    } catch (const std::exception& e) {
        throw ConfigError("invalid value for '" + full + "': " + e.what());
    }
    values_[full] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

RunConfig RunConfig::from_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        // Whole-line comments, and inline comments preceded by whitespace.
        for (std::size_t i = 0; i < line.size(); ++i) {
            if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line.erase(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto where = origin + ":" + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string full = section.empty() ? key : section + "." + key;
        try {
            if (!section.empty() && find_spec(full) == nullptr) {
                std::string msg = "unknown config key '" + key + "' in section [" + section + "]";
                if (const auto hint = suggest_key(key); !hint.empty()) msg += "; did you mean '" + hint + "'?";
                throw ConfigError(msg);
            }
            cfg.set(full, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str(), path.string());
}

std::map<std::string, std::string> RunConfig::provenance() const {
    auto out = values_;
    out.erase("run.workers");
    out.erase("run.out");
    out.erase("run.simd");
    return out;
}

InputMode RunConfig::data_mode() const { return parse_input_mode(get("data.mode")); }

std::vector<std::string> RunConfig::strategies() const { return parse_strategy_list(get("run.strategies")); }

std::size_t RunConfig::workers() const { return static_cast<std::size_t>(parse_integer(get("run.workers"))); }

SolverOptions RunConfig::solver() const {
    SolverOptions o;
    o.tolerance = parse_double(get("solver.tolerance"));
    o.improvement_tolerance = parse_double(get("solver.improvement_tolerance"));
    o.max_iterations = static_cast<int>(parse_integer(get("solver.max_iterations")));
    o.smoothing = parse_double(get("solver.smoothing"));
    return o;
}

MetricOptions RunConfig::metrics() const {
    return {parse_double(get("metrics.risk_free_rate")), parse_double(get("metrics.periods_per_year"))};
}

double RunConfig::eg_eta() const { return parse_double(get("baselines.eg_eta")); }

EnsembleConfig RunConfig::ensemble(EnsembleKind kind) const {
    EnsembleConfig c = EnsembleConfig::defaults(kind);
    c.w_grid = parse_width_grid(get("ensemble.w_grid"));
    c.rho_grid = parse_grid(get("ensemble.rho_grid"));
    if (kind == EnsembleKind::racorn_k) c.lambda_grid = parse_grid(get("ensemble.lambda_grid"));
    if (kind == EnsembleKind::racorn_c_k) c.lambda_grid = parse_grid(get("ensemble.lambda_grid_c"));
    c.top_fraction = parse_double(get("ensemble.top_fraction"));
    c.variant = parse_weight_variant(get("ensemble.weight_variant"));
    c.solver = solver();
    return c;
}

void RunConfig::set_lambda_max(const std::string& strategy, double lambda_max) {
    if (lambda_max < 0.0) throw ConfigError("lambda_max must be non-negative");
    std::ostringstream os;
    os.precision(17);
    os << "0:" << lambda_max << ":0.01";
    if (strategy == "racorn-k") {
        set("ensemble.lambda_grid", os.str());
    } else if (strategy == "racorn-c-k") {
        set("ensemble.lambda_grid_c", os.str());
    } else {
        throw ConfigError("lambda_max applies to racorn-k or racorn-c-k, not '" + strategy + "'");
    }
}

std::unique_ptr<Strategy> make_strategy(const std::string& name, const RunConfig& config, WorkerPool* pool) {
    if (name == "ubah") return std::make_unique<BuyAndHold>();
    if (name == "ucrp") return std::make_unique<UniformRebalanced>();
    if (name == "eg") return std::make_unique<ExponentiatedGradient>(config.eg_eta());
    if (std::find(known_strategies().begin(), known_strategies().end(), name) == known_strategies().end())
        throw ConfigError("unknown strategy '" + name + "'");
    return std::make_unique<EnsembleStrategy>(config.ensemble(parse_ensemble_kind(name)), pool);
}

}  // namespace racorn
