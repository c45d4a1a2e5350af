// Compiled with -mavx2 -mfma; only reached through the dispatch table after
// a CPU feature check.
#include "pdmp/simd.hpp"

#include <immintrin.h>

#include <cmath>

namespace pdmp::simd {
namespace {

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        i += 4;
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n)
{
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) {
        y[i] = std::fma(alpha, x[i], y[i]);
    }
}

double sum_abs_avx2(const double* a, std::size_t n)
{
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_and_pd(mask, _mm256_loadu_pd(a + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_and_pd(mask, _mm256_loadu_pd(a + i + 4)));
    }
    if (i + 4 <= n) {
        acc0 = _mm256_add_pd(acc0, _mm256_and_pd(mask, _mm256_loadu_pd(a + i)));
        i += 4;
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        s += std::fabs(a[i]);
    }
    return s;
}

void gemv_avx2(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols)
{
    std::size_t r = 0;
    // Four rows at a time share the x loads.
    for (; r + 4 <= rows; r += 4) {
        const double* a0 = a + r * cols;
        const double* a1 = a0 + cols;
        const double* a2 = a1 + cols;
        const double* a3 = a2 + cols;
        __m256d s0 = _mm256_setzero_pd();
        __m256d s1 = _mm256_setzero_pd();
        __m256d s2 = _mm256_setzero_pd();
        __m256d s3 = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d xv = _mm256_loadu_pd(x + c);
            s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a0 + c), xv, s0);
            s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a1 + c), xv, s1);
            s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a2 + c), xv, s2);
            s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a3 + c), xv, s3);
        }
        double t0 = hsum(s0);
        double t1 = hsum(s1);
        double t2 = hsum(s2);
        double t3 = hsum(s3);
        for (; c < cols; ++c) {
            t0 += a0[c] * x[c];
            t1 += a1[c] * x[c];
            t2 += a2[c] * x[c];
            t3 += a3[c] * x[c];
        }
        y[r] = t0;
        y[r + 1] = t1;
        y[r + 2] = t2;
        y[r + 3] = t3;
    }
    for (; r < rows; ++r) {
        y[r] = dot_avx2(a + r * cols, x, cols);
    }
}

void segment_moments_avx2(const double* x, const double* v, double dt, double* first,
                          double* second, std::size_t n)
{
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt / 3.0;
    const __m256d vdt = _mm256_set1_pd(dt);
    const __m256d vhdt2 = _mm256_set1_pd(0.5 * dt2);
    const __m256d vdt2 = _mm256_set1_pd(dt2);
    const __m256d vdt3 = _mm256_set1_pd(dt3);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xi = _mm256_loadu_pd(x + i);
        const __m256d vi = _mm256_loadu_pd(v + i);
        __m256d f = _mm256_loadu_pd(first + i);
        f = _mm256_fmadd_pd(xi, vdt, f);
        f = _mm256_fmadd_pd(vi, vhdt2, f);
        _mm256_storeu_pd(first + i, f);
        __m256d s = _mm256_loadu_pd(second + i);
        s = _mm256_fmadd_pd(_mm256_mul_pd(xi, xi), vdt, s);
        s = _mm256_fmadd_pd(_mm256_mul_pd(xi, vi), vdt2, s);
        s = _mm256_fmadd_pd(_mm256_mul_pd(vi, vi), vdt3, s);
        _mm256_storeu_pd(second + i, s);
    }
    for (; i < n; ++i) {
        first[i] += x[i] * dt + 0.5 * v[i] * dt2;
        second[i] += x[i] * x[i] * dt + x[i] * v[i] * dt2 + v[i] * v[i] * dt3;
    }
}

}  // namespace

namespace detail {
const KernelTable avx2_table{
    dot_avx2, axpy_avx2, sum_abs_avx2, gemv_avx2, segment_moments_avx2,
};
}  // namespace detail

}  // namespace pdmp::simd
