#pragma once

#include <cstddef>
#include <optional>
#include <string>

// Numeric inner loops shared by pattern matching and the portfolio solver.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant compiled into its own translation unit. The active
// table is chosen once at startup from the CPU's capabilities and can be
// pinned with set_backend(). Variants agree to rounding only (different
// summation order); a given backend is deterministic.

namespace racorn::kernels {

struct Moments {
    double saa = 0.0;  // sum (a - mean_a)^2
    double sbb = 0.0;  // sum (b - mean_b)^2
    double sab = 0.0;  // sum (a - mean_a)(b - mean_b)
};

struct Table {
    const char* name;
    double (*sum)(const double* a, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    Moments (*centered_moments)(const double* a, const double* b, std::size_t n, double mean_a,
                                double mean_b);
    /// out[k] = rows[k] . v for `count` rows of length m.
    void (*row_dots)(const double* rows, std::size_t count, std::size_t m, const double* v, double* out);
    /// out = sum_k coef[k] * rows[k]; out has length m and is overwritten.
    void (*weighted_row_sum)(const double* rows, std::size_t count, std::size_t m, const double* coef,
                             double* out);
};

enum class Backend { automatic, scalar, avx2 };

const Table& scalar_table();
/// Null when the binary or the CPU lacks AVX2/FMA.
const Table* avx2_table();

/// Currently selected kernels.
const Table& active();

/// Pins the backend. Throws std::runtime_error if it is unavailable.
void set_backend(Backend backend);
Backend parse_backend(const std::string& text);

}  // namespace racorn::kernels
