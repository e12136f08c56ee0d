#pragma once

#include <cstddef>
#include <functional>

namespace chaoskit {

/// Worker count: CHAOSKIT_THREADS if set to a positive integer, else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Work is split into
/// contiguous chunks; body must only write to state owned by index i. The first
/// exception thrown by any worker is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace chaoskit
