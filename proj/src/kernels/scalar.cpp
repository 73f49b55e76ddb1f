#include "racorn/kernels.hpp"

namespace racorn::kernels {

namespace {

double sum_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

Moments moments_scalar(const double* a, const double* b, std::size_t n, double mean_a, double mean_b) {
    Moments m;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        m.saa += da * da;
        m.sbb += db * db;
        m.sab += da * db;
    }
    return m;
}

void row_dots_scalar(const double* rows, std::size_t count, std::size_t m, const double* v, double* out) {
    for (std::size_t k = 0; k < count; ++k) out[k] = dot_scalar(rows + k * m, v, m);
}

void weighted_row_sum_scalar(const double* rows, std::size_t count, std::size_t m, const double* coef,
                             double* out) {
    for (std::size_t i = 0; i < m; ++i) out[i] = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double c = coef[k];
        const double* r = rows + k * m;
        for (std::size_t i = 0; i < m; ++i) out[i] += c * r[i];
    }
}

constexpr Table kScalar{"scalar", sum_scalar, dot_scalar, moments_scalar, row_dots_scalar,
                        weighted_row_sum_scalar};

}  // namespace

const Table& scalar_table() { return kScalar; }

}  // namespace racorn::kernels
