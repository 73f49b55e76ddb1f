#include "racorn/portfolio_opt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "racorn/kernels.hpp"

namespace racorn {

// ---------------------------------------------------------------------------
// Portfolio

Portfolio::Portfolio(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw std::logic_error("portfolio has no assets");
    bool clipped = false;
    for (double& w : weights_) {
        if (!std::isfinite(w)) throw std::logic_error("portfolio weight is not finite");
        if (w < 0.0) {
            if (w < -kNegativeClipTolerance)
                throw std::logic_error("portfolio weight " + std::to_string(w) + " is negative");
            w = 0.0;
            clipped = true;
        }
    }
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(total - 1.0) > kSimplexSumTolerance)
        throw std::logic_error("portfolio weights sum to " + std::to_string(total));
    if (clipped)
        for (double& w : weights_) w /= total;
}

Portfolio Portfolio::uniform(std::size_t m) {
    if (m == 0) throw std::logic_error("portfolio has no assets");
    return Portfolio(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

Portfolio Portfolio::vertex(std::size_t m, std::size_t i) {
    std::vector<double> w(m, 0.0);
    w.at(i) = 1.0;
    return Portfolio(std::move(w));
}

double Portfolio::growth(std::span<const double> x) const {
    if (x.size() != weights_.size()) throw std::invalid_argument("portfolio/asset size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += weights_[i] * x[i];
    return s;
}

std::vector<double> project_to_simplex(std::span<const double> v) {
    const std::size_t m = v.size();
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        cumulative += u[j];
        const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0) tau = candidate;
    }
    std::vector<double> out(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = std::max(v[i] - tau, 0.0);
        total += out[i];
    }
    for (double& x : out) x /= total;
    return out;
}

// ---------------------------------------------------------------------------
// Objective

Objective::Objective(std::vector<double> rows, std::size_t assets, double lambda)
    : rows_(std::move(rows)), assets_(assets), lambda_(lambda) {
    if (assets_ == 0) throw std::invalid_argument("objective needs at least one asset");
    if (rows_.empty() || rows_.size() % assets_ != 0)
        throw std::invalid_argument("objective needs a non-empty, rectangular set of rows");
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_))
        throw std::invalid_argument("risk aversion must be finite and non-negative");
    for (double x : rows_)
        if (!(x > 0.0) || !std::isfinite(x))
            throw std::invalid_argument("objective rows must be strictly positive and finite");
    count_ = rows_.size() / assets_;
}

Objective Objective::from_matches(SeriesView series, const MatchSet& matches, double lambda) {
    const std::size_t m = series.assets();
    std::vector<double> rows;
    rows.reserve(matches.size() * m);
    for (std::size_t j : matches.indices) {
        const auto r = series.row(j);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return Objective(std::move(rows), m, lambda);
}

namespace {

// Log-growth of b on every row, plus the moments the objective needs.
struct LogReturns {
    std::vector<double> growth;
    std::vector<double> logs;
    double mean = 0.0;
    double variance = 0.0;
};

void compute_log_returns(const Objective& obj, std::span<const double> b, LogReturns& out) {
    const std::size_t n = obj.count();
    out.growth.resize(n);
    out.logs.resize(n);
    kernels::active().row_dots(obj.rows().data(), n, obj.assets(), b.data(), out.growth.data());
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double g = out.growth[k];
        if (!(g > 0.0)) throw std::domain_error("portfolio growth is not positive on a matched row");
        out.logs[k] = std::log(g);
        total += out.logs[k];
    }
    out.mean = total / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = out.logs[k] - out.mean;
        ss += d * d;
    }
    out.variance = ss / static_cast<double>(n);
}

// Smoothed value; fills gradient when non-null.
double smoothed_value(const Objective& obj, std::span<const double> b, double smoothing, LogReturns& lr,
                      std::vector<double>& coef, double* gradient) {
    compute_log_returns(obj, b, lr);
    const std::size_t n = obj.count();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double lambda = obj.lambda();
    double sigma = 0.0;
    double value = lr.mean;
    if (lambda > 0.0) {
        sigma = std::sqrt(lr.variance + smoothing);
        value -= lambda * sigma;
    }
    if (!std::isfinite(value)) throw std::domain_error("objective is not finite");
    if (gradient != nullptr) {
        coef.resize(n);
        // d/db of mean log is (1/n) sum x/r; of sigma is (1/(n sigma)) sum (l - mean) x / r.
        const double risk_scale = (lambda > 0.0 && sigma > 0.0) ? lambda / sigma : 0.0;
        for (std::size_t k = 0; k < n; ++k)
            coef[k] = inv_n * (1.0 - risk_scale * (lr.logs[k] - lr.mean)) / lr.growth[k];
        kernels::active().weighted_row_sum(obj.rows().data(), n, obj.assets(), coef.data(), gradient);
    }
    return value;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::size_t first_argmax(std::span<const double> x) {
    return static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
}

}  // namespace

Evaluation evaluate(const Objective& obj, std::span<const double> b) {
    if (b.size() != obj.assets()) throw std::invalid_argument("portfolio/asset size mismatch");
    LogReturns lr;
    compute_log_returns(obj, b, lr);
    Evaluation e;
    e.mean_log = lr.mean;
    e.risk = std::sqrt(lr.variance);
    e.value = e.mean_log - obj.lambda() * e.risk;
    if (!std::isfinite(e.value)) throw std::domain_error("objective is not finite");
    return e;
}

ValueAndGradient objective_gradient(const Objective& obj, std::span<const double> b, double smoothing) {
    if (b.size() != obj.assets()) throw std::invalid_argument("portfolio/asset size mismatch");
    LogReturns lr;
    std::vector<double> coef;
    ValueAndGradient out;
    out.gradient.resize(obj.assets());
    out.value = smoothed_value(obj, b, smoothing, lr, coef, out.gradient.data());
    return out;
}

double projected_gradient_norm(std::span<const double> b, std::span<const double> gradient) {
    std::vector<double> shifted(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) shifted[i] = b[i] + gradient[i];
    const auto p = project_to_simplex(shifted);
    double ss = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) ss += (p[i] - b[i]) * (p[i] - b[i]);
    return std::sqrt(ss);
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::closed_form: return "closed_form";
        case SolveStatus::stationary: return "stationary";
        case SolveStatus::stalled: return "stalled";
        case SolveStatus::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

namespace {

// Spectral projected gradient from `b` (updated in place) at one smoothing
// level. Returns the number of iterations used.
int spg_ascent(const Objective& obj, std::vector<double>& b, double smoothing, const SolverOptions& opts,
               int budget, Solution& sol) {
    constexpr double kArmijo = 1e-4;
    constexpr double kMinStep = 1e-10;
    constexpr double kMaxStep = 1e10;
    constexpr int kMaxHalvings = 60;

    const std::size_t m = obj.assets();
    LogReturns lr;
    std::vector<double> coef;
    std::vector<double> grad(m), trial(m), trial_grad(m), direction(m), shifted(m);

    double f = smoothed_value(obj, b, smoothing, lr, coef, grad.data());
    double step = 1.0;
    int small_steps = 0;
    sol.status = SolveStatus::iteration_limit;

    int iter = 0;
    for (; iter < budget; ++iter) {
        sol.gradient_norm = projected_gradient_norm(b, grad);
        if (sol.gradient_norm < opts.tolerance) {
            sol.status = SolveStatus::stationary;
            break;
        }

        for (std::size_t i = 0; i < m; ++i) shifted[i] = b[i] + step * grad[i];
        const auto target = project_to_simplex(shifted);
        for (std::size_t i = 0; i < m; ++i) direction[i] = target[i] - b[i];
        const double slope = dot(grad, direction);
        if (!(slope > 0.0)) {
            sol.status = SolveStatus::stalled;
            break;
        }

        // Backtrack along the feasible segment b + theta * direction.
        double theta = 1.0;
        double f_trial = 0.0;
        bool accepted = false;
        for (int h = 0; h < kMaxHalvings; ++h) {
            for (std::size_t i = 0; i < m; ++i) trial[i] = b[i] + theta * direction[i];
            f_trial = smoothed_value(obj, trial, smoothing, lr, coef, trial_grad.data());
            if (f_trial >= f + kArmijo * theta * slope) {
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        if (!accepted) {
            sol.status = SolveStatus::stalled;
            break;
        }

        // Spectral (Barzilai-Borwein) trial step for the next iteration.
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double s = trial[i] - b[i];
            const double y = trial_grad[i] - grad[i];
            ss += s * s;
            sy += s * y;
        }
        step = sy < 0.0 ? std::clamp(ss / -sy, kMinStep, kMaxStep) : kMaxStep;

        const double improvement = f_trial - f;
        b.swap(trial);
        grad.swap(trial_grad);
        f = f_trial;
        // One small gain can come from a badly scaled step (the first trial
        // step is not spectral), so require two in a row.
        small_steps = improvement <= opts.improvement_tolerance * std::max(1.0, std::abs(f)) ? small_steps + 1 : 0;
        if (small_steps == 2) {
            sol.gradient_norm = projected_gradient_norm(b, grad);
            sol.status = sol.gradient_norm < opts.tolerance ? SolveStatus::stationary : SolveStatus::stalled;
            ++iter;
            break;
        }
    }
    if (sol.status == SolveStatus::iteration_limit) sol.gradient_norm = projected_gradient_norm(b, grad);

    // Renormalise away rounding drift from the segment updates.
    double total = 0.0;
    for (double& w : b) {
        if (w < 0.0) w = 0.0;
        total += w;
    }
    for (double& w : b) w /= total;
    return iter;
}

}  // namespace

Solution optimize(const Objective& obj, const SolverOptions& opts) {
    const std::size_t m = obj.assets();
    Solution sol;

    if (m == 1) {
        sol.portfolio = Portfolio::vertex(1, 0);
        sol.status = SolveStatus::closed_form;
        return sol;
    }
    if (obj.count() == 1) {
        // One sample: risk is identically zero and log(b . x) peaks at the
        // largest relative. Ties go to the lowest index.
        sol.portfolio = Portfolio::vertex(m, first_argmax(obj.row(0)));
        sol.status = SolveStatus::closed_form;
        return sol;
    }

    std::vector<double> b(m, 1.0 / static_cast<double>(m));
    sol.iterations = spg_ascent(obj, b, opts.smoothing, opts, opts.max_iterations, sol);

    // When the optimum sits where the log returns are (nearly) equal, the
    // risk term has a kink: the smoothed problem is badly conditioned and its
    // optimum is offset by about sqrt(smoothing). Re-solve along a smoothing
    // homotopy, warm-starting each level, and keep the best exact value.
    constexpr double kHomotopyStart = 1e-4;
    constexpr double kHomotopyFactor = 1e-2;
    constexpr double kSmoothingFloor = 1e-28;
    const auto kinked = [&](std::span<const double> point, double smoothing) {
        const double risk = evaluate(obj, point).risk;
        return risk * risk < smoothing / kHomotopyFactor;
    };
    if (obj.lambda() > 0.0 && (sol.flagged() || kinked(b, opts.smoothing))) {
        double best = evaluate(obj, b).value;
        std::vector<double> path(m, 1.0 / static_cast<double>(m));
        for (double smoothing = kHomotopyStart; smoothing >= kSmoothingFloor; smoothing *= kHomotopyFactor) {
            Solution stage;
            sol.iterations += spg_ascent(obj, path, smoothing, opts, opts.max_iterations, stage);
            const double value = evaluate(obj, path).value;
            if (value > best) {
                best = value;
                b = path;
                sol.status = stage.status;
                sol.gradient_norm = stage.gradient_norm;
            }
            if (smoothing <= opts.smoothing && !kinked(path, smoothing)) break;
        }
    }

    sol.portfolio = Portfolio(std::move(b));
    const auto uniform = Portfolio::uniform(m);
    if (evaluate(obj, sol.portfolio).value < evaluate(obj, uniform).value) sol.portfolio = uniform;
    return sol;
}

// ---------------------------------------------------------------------------
// Grid oracle

namespace {

// Visits every composition of `total` into `parts` non-negative integers in
// descending lexicographic order.
template <typename Visit>
void for_each_composition(std::vector<int>& current, std::size_t index, int remaining, Visit&& visit) {
    if (index + 1 == current.size()) {
        current[index] = remaining;
        visit(current);
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        current[index] = v;
        for_each_composition(current, index + 1, remaining - v, visit);
    }
}

}  // namespace

GridOptimum grid_oracle(const Objective& obj, double step) {
    const std::size_t m = obj.assets();
    if (m > 4) throw std::invalid_argument("grid oracle refuses more than 4 assets");
    if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("grid step must lie in (0, 1]");
    const double ticks_real = 1.0 / step;
    const int ticks = static_cast<int>(std::lround(ticks_real));
    if (std::abs(ticks_real - ticks) > 1e-9 * ticks_real)
        throw std::invalid_argument("grid step must divide 1");

    std::vector<int> comp(m, 0);
    std::vector<double> w(m);
    bool have = false;
    GridOptimum best;
    std::vector<double> best_w;
    for_each_composition(comp, 0, ticks, [&](const std::vector<int>& c) {
        for (std::size_t i = 0; i < m; ++i) w[i] = static_cast<double>(c[i]) / ticks;
        const auto e = evaluate(obj, w);
        // Descending lexicographic visit order, so strict improvement keeps
        // the lexicographically largest among ties.
        if (!have || e.value > best.evaluation.value) {
            have = true;
            best.evaluation = e;
            best_w = w;
        }
    });
    best.portfolio = Portfolio(best_w);
    return best;
}

}  // namespace racorn
