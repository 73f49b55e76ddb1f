#include "racorn/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "racorn/backtest.hpp"
#include "racorn/config.hpp"
#include "racorn/kernels.hpp"
#include "racorn/report.hpp"

namespace racorn::cli {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::string config;
    std::string data;
    std::string mode;
    std::vector<std::string> strategies;
    std::string out;
    std::size_t workers = 0;
    std::vector<std::string> overrides;
    std::string simd;
};

void add_common(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--config", f.config, "Config file (INI-style sections)");
    cmd.add_option("--data", f.data, "Dataset CSV");
    cmd.add_option("--mode", f.mode, "Input mode: prices or relatives");
    cmd.add_option("--strategy", f.strategies, "Strategy to run (repeatable)");
    cmd.add_option("--out", f.out, "Output directory");
    cmd.add_option("--workers", f.workers, "Worker threads");
    cmd.add_option("--set", f.overrides, "Override a config key: section.key=value (repeatable)");
    cmd.add_option("--simd", f.simd, "Kernel backend: auto, scalar or avx2");
}

RunConfig resolve_config(const CommonFlags& f) {
    RunConfig cfg = f.config.empty() ? RunConfig() : RunConfig::from_file(f.config);
    if (!f.data.empty()) cfg.set("data.path", f.data);
    if (!f.mode.empty()) cfg.set("data.mode", f.mode);
    if (!f.strategies.empty()) {
        std::string joined;
        for (const auto& s : f.strategies) joined += (joined.empty() ? "" : ",") + s;
        cfg.set("run.strategies", joined);
    }
    if (!f.out.empty()) cfg.set("run.out", f.out);
    if (f.workers != 0) cfg.set("run.workers", std::to_string(f.workers));
    if (!f.simd.empty()) cfg.set("run.simd", f.simd);
    for (const auto& o : f.overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
        cfg.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (cfg.data_path().empty()) throw ConfigError("no dataset given (use --data or [data] path)");
    kernels::set_backend(kernels::parse_backend(cfg.simd()));
    return cfg;
}

std::vector<BacktestReport> run_strategies(const RunConfig& cfg, const PriceRelativeSeries& series,
                                           const std::vector<std::string>& names) {
    WorkerPool pool(cfg.workers());
    std::vector<BacktestReport> reports;
    for (const auto& name : names) {
        auto strategy = make_strategy(name, cfg, &pool);
        reports.push_back(run_backtest(series, *strategy, cfg.metrics()));
    }
    return reports;
}

// Removes every file it wrote unless commit() is called.
class OutputTransaction {
public:
    explicit OutputTransaction(fs::path dir) : dir_(std::move(dir)) {}
    ~OutputTransaction() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
        if (created_dir_) fs::remove(dir_, ec);
    }

    void begin() {
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_);
            created_dir_ = true;
        }
    }

    template <typename Writer>
    void write(const std::string& filename, Writer&& writer) {
        const fs::path p = dir_ / filename;
        written_.push_back(p);
        std::ofstream os(p, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        writer(os);
        os.flush();
        if (!os) throw std::runtime_error("failed writing " + p.string());
    }

    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool created_dir_ = false;
    bool committed_ = false;
};

int cmd_backtest(const CommonFlags& flags, std::ostream& out) {
    const RunConfig cfg = resolve_config(flags);
    const auto series = load_series(cfg.data_path(), cfg.data_mode());
    const auto reports = run_strategies(cfg, series, cfg.strategies());

    OutputTransaction tx(cfg.output_dir());
    tx.begin();
    const auto provenance = cfg.provenance();
    for (const auto& r : reports) {
        tx.write(r.strategy + ".report.json", [&](std::ostream& os) { write_report_json(os, r, provenance, series); });
        tx.write(r.strategy + ".wealth.csv", [&](std::ostream& os) { write_wealth_csv(os, r); });
    }
    tx.write("metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, reports); });
    tx.commit();

    out << series.rows() << " periods x " << series.assets() << " assets, " << cfg.workers() << " worker(s), "
        << kernels::active().name << " kernels\n";
    print_metrics_table(out, reports);
    return kOk;
}

int cmd_validate(const std::string& data, const std::string& mode_text, std::ostream& out) {
    const InputMode mode = parse_input_mode(mode_text);
    const auto scan = scan_csv(data, mode);
    const bool ok = scan.ok();

    if (ok) {
        std::size_t periods = scan.rows;
        std::vector<double> relatives = scan.values;
        const std::size_t m = scan.asset_names.size();
        if (mode == InputMode::prices) {
            PriceSeries p{scan.values, scan.asset_names, scan.period_labels};
            relatives = derive_relatives(p).values();
            periods = scan.rows - 1;
        }
        const auto [lo, hi] = std::minmax_element(relatives.begin(), relatives.end());
        out << data << ": " << periods << " periods × " << m << " assets\n";
        out << "price relatives: min " << *lo << ", max " << *hi << "\n";
    } else {
        out << data << ": invalid\n";
    }
    std::size_t errors = 0, warnings = 0;
    for (const auto& issue : scan.issues) {
        (issue.fatal ? errors : warnings)++;
        out << (issue.fatal ? "error" : "warning") << ": line " << issue.line;
        if (issue.column) out << ", column " << issue.column;
        out << ": " << issue.message << "\n";
    }
    out << errors << " error(s), " << warnings << " warning(s)\n";
    return ok ? kOk : kFailure;
}

int cmd_sweep(const CommonFlags& flags, const std::string& axis, const std::vector<std::string>& values,
              std::ostream& out) {
    const RunConfig base = resolve_config(flags);
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    const auto names = base.strategies();
    if (names.size() != 1) throw ConfigError("sweep runs exactly one strategy; pass a single --strategy");
    const auto& strategy = names.front();
    const auto series = load_series(base.data_path(), base.data_mode());

    std::vector<BacktestReport> rows;
    for (const auto& value : values) {
        RunConfig cfg = base;
        if (axis == "lambda_max") {
            double lambda_max = 0.0;
            std::istringstream is(value);
            if (!(is >> lambda_max)) throw ConfigError("lambda_max value '" + value + "' is not a number");
            cfg.set_lambda_max(strategy, lambda_max);
        } else {
            cfg.set(axis, value);
        }
        rows.push_back(run_strategies(cfg, series, {strategy}).front());
    }

    OutputTransaction tx(base.output_dir());
    tx.begin();
    tx.write("sweep.csv", [&](std::ostream& os) {
        os << "axis,value,strategy,RET,SR,MDD\n";
        char buf[64];
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto& m = rows[k].metrics;
            os << axis << ',' << values[k] << ',' << strategy << ',';
            std::snprintf(buf, sizeof buf, "%.17g", m.ret);
            os << buf << ',' << format_sharpe(m.sharpe, -1) << ',';
            std::snprintf(buf, sizeof buf, "%.17g", m.mdd);
            os << buf << '\n';
        }
    });
    tx.commit();

    char line[160];
    std::snprintf(line, sizeof line, "%-24s %12s %10s %8s\n", axis.c_str(), "RET", "SR", "MDD");
    out << line;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& m = rows[k].metrics;
        char ret[32], mdd[32];
        std::snprintf(ret, sizeof ret, "%.4f", m.ret);
        std::snprintf(mdd, sizeof mdd, "%.2f", m.mdd);
        std::snprintf(line, sizeof line, "%-24s %12s %10s %8s\n", values[k].c_str(), ret,
                      format_sharpe(m.sharpe, 2).c_str(), mdd);
        out << line;
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pattern-matching portfolio selection backtester (CORN-K, RACORN-K, RACORN(C)-K)", "racorn"};
    app.require_subcommand(1);

    CommonFlags backtest_flags;
    auto* backtest = app.add_subcommand("backtest", "Run strategies and write reports");
    add_common(*backtest, backtest_flags);

    std::string validate_data;
    std::string validate_mode = "relatives";
    auto* validate = app.add_subcommand("validate", "Check a dataset file");
    validate->add_option("--data", validate_data, "Dataset CSV")->required();
    validate->add_option("--mode", validate_mode, "Input mode: prices or relatives");

    CommonFlags sweep_flags;
    std::string axis;
    std::vector<std::string> sweep_values;
    auto* sweep = app.add_subcommand("sweep", "Vary one config key and tabulate metrics");
    add_common(*sweep, sweep_flags);
    sweep->add_option("--axis", axis, "Config key to vary (section.key) or lambda_max")->required();
    sweep->add_option("--values", sweep_values, "Values to try")->required()->delimiter(',');

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("racorn");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    try {
        if (*backtest) return cmd_backtest(backtest_flags, out);
        if (*validate) return cmd_validate(validate_data, validate_mode, out);
        if (*sweep) return cmd_sweep(sweep_flags, axis, sweep_values, out);
    } catch (const ConfigError& e) {
        err << "racorn: config error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "racorn: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        err << "racorn: data error: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        err << "racorn: error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

}  // namespace racorn::cli
