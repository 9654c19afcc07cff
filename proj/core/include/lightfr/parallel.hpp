#pragma once

#include <cstddef>
#include <functional>

namespace lightfr {

/// Worker count from LIGHTFR_WORKERS, else hardware concurrency (at least 1).
unsigned default_workers();

/// Calls fn(i) for every i in [0, count) on up to `workers` threads.
/// Blocks until all calls return; the first exception thrown is rethrown.
/// Callers must write results into pre-sized, index-addressed storage.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace lightfr
