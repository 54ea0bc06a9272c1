#pragma once

#include <cstddef>
#include <functional>

namespace regionflow {

// Worker count: REGIONFLOW_THREADS if set and positive, otherwise
// hardware_concurrency (at least 1).
std::size_t thread_count();

// Runs body(i) for i in [0, n) over thread_count() workers with a static
// block schedule. Callers must write only to slots owned by i, so results
// do not depend on the number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace regionflow
