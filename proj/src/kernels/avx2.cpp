// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.
#include "racorn/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace racorn::kernels {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i];
    return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

Moments moments_avx2(const double* a, const double* b, std::size_t n, double mean_a, double mean_b) {
    const __m256d ma = _mm256_set1_pd(mean_a);
    const __m256d mb = _mm256_set1_pd(mean_b);
    __m256d aa = _mm256_setzero_pd();
    __m256d bb = _mm256_setzero_pd();
    __m256d ab = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a + i), ma);
        const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b + i), mb);
        aa = _mm256_fmadd_pd(da, da, aa);
        bb = _mm256_fmadd_pd(db, db, bb);
        ab = _mm256_fmadd_pd(da, db, ab);
    }
    Moments m{hsum(aa), hsum(bb), hsum(ab)};
    for (; i < n; ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        m.saa += da * da;
        m.sbb += db * db;
        m.sab += da * db;
    }
    return m;
}

void row_dots_avx2(const double* rows, std::size_t count, std::size_t m, const double* v, double* out) {
    for (std::size_t k = 0; k < count; ++k) out[k] = dot_avx2(rows + k * m, v, m);
}

void weighted_row_sum_avx2(const double* rows, std::size_t count, std::size_t m, const double* coef,
                           double* out) {
    std::size_t i = 0;
    // Column blocks of 8 keep two accumulators in registers across all rows.
    for (; i + 8 <= m; i += 8) {
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        for (std::size_t k = 0; k < count; ++k) {
            const __m256d c = _mm256_set1_pd(coef[k]);
            const double* r = rows + k * m + i;
            acc0 = _mm256_fmadd_pd(c, _mm256_loadu_pd(r), acc0);
            acc1 = _mm256_fmadd_pd(c, _mm256_loadu_pd(r + 4), acc1);
        }
        _mm256_storeu_pd(out + i, acc0);
        _mm256_storeu_pd(out + i + 4, acc1);
    }
    for (; i + 4 <= m; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < count; ++k)
            acc = _mm256_fmadd_pd(_mm256_set1_pd(coef[k]), _mm256_loadu_pd(rows + k * m + i), acc);
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < m; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < count; ++k) s += coef[k] * rows[k * m + i];
        out[i] = s;
    }
}

constexpr Table kAvx2{"avx2", sum_avx2, dot_avx2, moments_avx2, row_dots_avx2, weighted_row_sum_avx2};

}  // namespace

const Table* avx2_compiled_table() { return &kAvx2; }

}  // namespace racorn::kernels

#else

namespace racorn::kernels {
const Table* avx2_compiled_table() { return nullptr; }
}  // namespace racorn::kernels

#endif
