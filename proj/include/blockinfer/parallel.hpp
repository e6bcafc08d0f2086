#pragma once

#include <cstddef>
#include <functional>

namespace blockinfer {

/// BLOCKINFER_THREADS when set to a positive integer, else the hardware count.
int default_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Results must be
/// written by index so the outcome does not depend on scheduling. The first
/// exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace blockinfer
