#include "pdmp/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pdmp::simd {
namespace {

bool cpu_has_avx2() noexcept
{
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend initial_backend() noexcept
{
    if (const char* env = std::getenv("PDMP_SIMD")) {
        const std::string_view name(env);
        if (name == "scalar") {
            return Backend::Scalar;
        }
        if (name == "avx2" && cpu_has_avx2()) {
            return Backend::Avx2;
        }
    }
    return best_backend();
}

const KernelTable* table_for(Backend backend) noexcept
{
#if defined(__x86_64__) || defined(_M_X64)
    if (backend == Backend::Avx2) {
        return &detail::avx2_table;
    }
#endif
    (void)backend;
    return &detail::scalar_table;
}

std::atomic<const KernelTable*>& active_table() noexcept
{
    static std::atomic<const KernelTable*> table{table_for(initial_backend())};
    return table;
}

}  // namespace

const char* to_string(Backend backend) noexcept
{
    return backend == Backend::Avx2 ? "avx2" : "scalar";
}

bool available(Backend backend) noexcept
{
    return backend == Backend::Scalar || cpu_has_avx2();
}

Backend best_backend() noexcept
{
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

const KernelTable& kernels() noexcept
{
    return *active_table().load(std::memory_order_relaxed);
}

const KernelTable& kernels(Backend backend)
{
    if (!available(backend)) {
        throw std::runtime_error(std::string("SIMD backend unavailable on this CPU: ") + to_string(backend));
    }
    return *table_for(backend);
}

Backend active_backend() noexcept
{
    return active_table().load() == table_for(Backend::Scalar) ? Backend::Scalar : Backend::Avx2;
}

void set_backend(Backend backend)
{
    active_table().store(&kernels(backend));
}

}  // namespace pdmp::simd
