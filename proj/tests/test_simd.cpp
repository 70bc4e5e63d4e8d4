// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "kflow/rng.hpp"
#include "kflow/simd.hpp"

using kflow::Rng;
namespace simd = kflow::simd;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-10.0, 10.0);
    return v;
}

bool have_avx2() {
    try {
        simd::force("avx2");
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

TEST_CASE("scalar reference kernels match a plain loop") {
    Rng rng(1);
    auto a = random_vector(rng, 37);
    auto b = random_vector(rng, 37);
    double dot = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        double d = a[i] - b[i];
        d2 += d * d;
    }
    CHECK(simd::scalar::dot(a.data(), b.data(), a.size()) == doctest::Approx(dot));
    CHECK(simd::scalar::squared_distance(a.data(), b.data(), a.size()) == doctest::Approx(d2));

    auto y = random_vector(rng, 37);
    auto expected = y;
    for (std::size_t i = 0; i < y.size(); ++i) expected[i] += 2.5 * a[i];
    simd::scalar::axpy(y.data(), 2.5, a.data(), y.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(expected[i]));
}

TEST_CASE("avx2 kernels agree with scalar across lengths") {
    if (!have_avx2()) return;
    Rng rng(2);
    // Lengths straddle the vector width, the unroll, and the remainders.
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 63u, 128u, 1000u}) {
        auto a = random_vector(rng, n);
        auto b = random_vector(rng, n);
        CHECK(simd::avx2::dot(a.data(), b.data(), n) ==
              doctest::Approx(simd::scalar::dot(a.data(), b.data(), n)).epsilon(1e-12));
        CHECK(simd::avx2::squared_distance(a.data(), b.data(), n) ==
              doctest::Approx(simd::scalar::squared_distance(a.data(), b.data(), n))
                  .epsilon(1e-12));
        auto y1 = random_vector(rng, n);
        auto y2 = y1;
        simd::avx2::axpy(y1.data(), -1.75, a.data(), n);
        simd::scalar::axpy(y2.data(), -1.75, a.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("zero-length inputs are safe") {
    double dummy = 0.0;
    CHECK(simd::scalar::dot(&dummy, &dummy, 0) == 0.0);
    CHECK(simd::scalar::squared_distance(&dummy, &dummy, 0) == 0.0);
    simd::scalar::axpy(&dummy, 1.0, &dummy, 0);
    if (have_avx2()) {
        CHECK(simd::avx2::dot(&dummy, &dummy, 0) == 0.0);
        CHECK(simd::avx2::squared_distance(&dummy, &dummy, 0) == 0.0);
    }
}

TEST_CASE("force selects the named implementation") {
    simd::force("scalar");
    CHECK(std::string(simd::active().name) == "scalar");
    if (have_avx2()) {
        simd::force("avx2");
        CHECK(std::string(simd::active().name) == "avx2");
    }
    CHECK_THROWS(simd::force("sse9000"));
    simd::force("scalar");
}
