// Dense arithmetic kernels used in the sampler hot loops. Every kernel has a
// portable scalar reference and an AVX2/FMA variant; the variant is picked
// once at startup from the CPU features (override with PDMP_SIMD=scalar|avx2)
// and can be switched explicitly for equivalence testing.
#pragma once

#include <cassert>
#include <cstddef>
#include <span>

namespace pdmp::simd {

enum class Backend { Scalar, Avx2 };

const char* to_string(Backend backend) noexcept;

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*sum_abs)(const double* a, std::size_t n);
    // y = A x, A row-major rows x cols
    void (*gemv)(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
    // Exact integrals of x_i(s) = x_i + s v_i over s in [0, dt]:
    // first += int x_i, second += int x_i^2.
    void (*segment_moments)(const double* x, const double* v, double dt, double* first,
                            double* second, std::size_t n);
};

const KernelTable& kernels() noexcept;
const KernelTable& kernels(Backend backend);

bool available(Backend backend) noexcept;
Backend best_backend() noexcept;
Backend active_backend() noexcept;
/// Throws std::runtime_error when the CPU lacks the requested backend.
void set_backend(Backend backend);

inline double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    assert(a.size() == b.size());
    return kernels().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept
{
    assert(x.size() == y.size());
    kernels().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum_abs(std::span<const double> a) noexcept
{
    return kernels().sum_abs(a.data(), a.size());
}

inline void gemv(std::span<const double> a, std::span<const double> x, std::span<double> y) noexcept
{
    assert(a.size() == x.size() * y.size());
    kernels().gemv(a.data(), x.data(), y.data(), y.size(), x.size());
}

inline void segment_moments(std::span<const double> x, std::span<const double> v, double dt,
                            std::span<double> first, std::span<double> second) noexcept
{
    kernels().segment_moments(x.data(), v.data(), dt, first.data(), second.data(), x.size());
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace pdmp::simd
