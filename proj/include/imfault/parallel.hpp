#pragma once

#include <cstddef>
#include <functional>

namespace imfault {

// Worker count: hardware concurrency capped by IMFAULT_THREADS (>= 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, n). Each index is handled exactly once; callers
// write results into slot i so merge order never depends on scheduling.
// The first exception thrown by any task is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace imfault
