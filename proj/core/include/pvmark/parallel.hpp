#pragma once

#include <cstddef>
#include <functional>

namespace pvmark {

// Worker count: PVMARK_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
unsigned worker_count();

// Calls fn(i) for every i in [0, n) across worker_count() threads.  The first
// exception thrown by any call is rethrown after all workers stop.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace pvmark
