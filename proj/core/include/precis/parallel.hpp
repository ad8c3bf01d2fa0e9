#pragma once

#include <functional>

namespace precis {

// Thread budget: min(hardware cores, PRECIS_THREADS) with PRECIS_THREADS read once.
int max_threads();

// Runs fn(i) for i in [0, count). Work items must be independent; results should
// be written to preallocated per-index slots so the outcome is schedule-free.
// The first exception thrown by any item is rethrown after all threads join.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace precis
