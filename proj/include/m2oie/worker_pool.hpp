#pragma once

#include <cstddef>
#include <functional>

namespace m2oie {

// Worker count: M2OIE_THREADS if set to a positive integer, else the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index runs
// exactly once; callers write results into slot i, so merged output keeps
// input order regardless of scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace m2oie
