#pragma once

#include <cstddef>
#include <functional>

namespace gbsde {

/// Process-wide cap on worker threads used by the solvers. 0 selects the
/// hardware concurrency. Results never depend on this value.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(lo, hi) over disjoint chunks covering [begin, end). Ranges
/// shorter than min_chunk per worker run inline on the calling thread. The
/// first exception thrown by any chunk is rethrown after all workers join.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 256);

}  // namespace gbsde
