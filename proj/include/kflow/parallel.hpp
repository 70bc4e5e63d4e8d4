// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace kflow {

/// Worker count for parallel loops: KFLOW_THREADS if set, otherwise the number
/// of hardware threads.
std::size_t thread_count();

/// Runs fn(begin, end) over disjoint chunks of [0, n), possibly on multiple
/// threads. Chunk boundaries are fixed (independent of thread count) so that
/// chunk-local reductions stay deterministic.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Fixed chunk width used by parallel_chunks and the deterministic reducers.
inline constexpr std::size_t kChunk = 1024;

}  // namespace kflow
