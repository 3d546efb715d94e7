#pragma once

#include <cstddef>
#include <functional>

namespace cgpkit {

/// Worker cap: CGPKIT_THREADS if set to a positive integer, otherwise the
/// number of hardware threads (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace cgpkit
