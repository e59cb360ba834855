#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace errmax {

/// Number of worker threads to use when the caller passes 0.
unsigned default_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; callers write results into per-index slots so the
/// outcome never depends on the worker count. The first exception thrown by
/// any body is rethrown on the calling thread after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Deterministic child seed for stream `stream` of a root seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

}  // namespace errmax
