// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

namespace kflow::simd {

// Hot inner loops of the kernel/loss pipeline. Each operation has a scalar
// reference implementation and an AVX2 variant; `dispatch()` picks one at
// startup based on CPU support, overridable via KFLOW_SIMD=scalar|avx2.

using DotFn = double (*)(const double*, const double*, std::size_t);
using SqDistFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double*, double, const double*, std::size_t);

struct Kernels {
    DotFn dot;
    SqDistFn squared_distance;
    AxpyFn axpy;  // y[i] += a * x[i]
    const char* name;
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double* y, double a, const double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double* y, double a, const double* x, std::size_t n);
}  // namespace avx2
#endif

/// The active kernel set. Resolved once on first use.
const Kernels& active();

/// Force a specific implementation (used by the equivalence tests).
/// Accepts "scalar" or "avx2"; throws if the CPU lacks the requested ISA.
void force(const std::string& name);

inline double dot(const double* a, const double* b, std::size_t n) {
    return active().dot(a, b, n);
}
inline double squared_distance(const double* a, const double* b, std::size_t n) {
    return active().squared_distance(a, b, n);
}
inline void axpy(double* y, double a, const double* x, std::size_t n) {
    active().axpy(y, a, x, n);
}

}  // namespace kflow::simd
