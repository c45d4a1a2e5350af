#include "pdmp/simd.hpp"

#include <cmath>

namespace pdmp::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

double sum_abs_scalar(const double* a, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += std::fabs(a[i]);
    }
    return s;
}

void gemv_scalar(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols)
{
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot_scalar(a + r * cols, x, cols);
    }
}

void segment_moments_scalar(const double* x, const double* v, double dt, double* first,
                            double* second, std::size_t n)
{
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    for (std::size_t i = 0; i < n; ++i) {
        first[i] += x[i] * dt + 0.5 * v[i] * dt2;
        second[i] += x[i] * x[i] * dt + x[i] * v[i] * dt2 + v[i] * v[i] * dt3 / 3.0;
    }
}

}  // namespace

namespace detail {
const KernelTable scalar_table{
    dot_scalar, axpy_scalar, sum_abs_scalar, gemv_scalar, segment_moments_scalar,
};
}  // namespace detail

}  // namespace pdmp::simd
