#pragma once

#include <cstddef>
#include <functional>

namespace phlab {

// Worker count: PHLAB_THREADS if set and positive, else the hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n). Work items must be independent; callers merge per-item
// results in index order so outputs never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace phlab
