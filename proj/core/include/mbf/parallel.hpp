#pragma once

#include <functional>

namespace mbf {

// Worker count used by the parallel loops: the MBF_THREADS environment
// variable wins, then a positive hint, then hardware concurrency.
int resolve_parallelism(int hint);

// Runs fn(begin, end, worker_index) over a fixed partition of [0, n).
// Callers must make the work schedule-independent (per-index streams,
// disjoint output slots, commutative merges); this function only splits
// the range.
void parallel_for(long n, int workers, const std::function<void(long, long, int)>& fn);

}  // namespace mbf
