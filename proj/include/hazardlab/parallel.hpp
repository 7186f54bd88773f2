#pragma once

#include <cstddef>
#include <functional>

namespace hazardlab {

// Worker count: HAZARDLAB_THREADS when set to a positive integer, else the
// hardware concurrency, never more than the number of tasks.
unsigned worker_count(std::size_t tasks);

// Runs body(i) for i in [0, n) on worker_count(n) threads. Work is handed out
// through an atomic counter; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hazardlab
