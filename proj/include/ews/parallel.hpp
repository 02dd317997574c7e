#pragma once

#include <cstddef>
#include <functional>

namespace ews::parallel {

// Number of workers used when a caller passes threads <= 0.
int default_threads();

// Runs fn(i) for i in [0, n) with at most `threads` workers. Work is split
// into contiguous index blocks fixed by (n, threads) only, and every result
// must be written to an i-indexed slot by the caller, so the outcome is
// independent of scheduling and of the thread count. threads <= 1 runs
// inline. Exceptions from workers are rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace ews::parallel
