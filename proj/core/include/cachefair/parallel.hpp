#pragma once

#include <cstddef>
#include <functional>

namespace cachefair {

/// Worker count from CACHEFAIR_THREADS, else the hardware concurrency (>= 1).
unsigned configured_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers with static
/// contiguous chunks. Exceptions from any worker are rethrown on the caller.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace cachefair
