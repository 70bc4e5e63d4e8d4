// SPDX-License-Identifier: Apache-2.0
#include "kflow/simd.hpp"

#include <cstdlib>
#include <stdexcept>

namespace kflow::simd {

namespace {

constexpr Kernels kScalar{scalar::dot, scalar::squared_distance, scalar::axpy, "scalar"};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Kernels kAvx2{avx2::dot, avx2::squared_distance, avx2::axpy, "avx2"};

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"); }
#endif

Kernels g_active = [] {
#if defined(__x86_64__) || defined(_M_X64)
    const char* env = std::getenv("KFLOW_SIMD");
    if (env && std::string(env) == "scalar") return kScalar;
    if (cpu_has_avx2()) return kAvx2;
#endif
    return kScalar;
}();

}  // namespace

const Kernels& active() { return g_active; }

void force(const std::string& name) {
    if (name == "scalar") {
        g_active = kScalar;
        return;
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2") {
        if (!cpu_has_avx2()) throw std::runtime_error("simd::force: CPU lacks AVX2/FMA");
        g_active = kAvx2;
        return;
    }
#endif
    throw std::invalid_argument("simd::force: unknown implementation '" + name + "'");
}

}  // namespace kflow::simd
