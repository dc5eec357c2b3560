#pragma once

#include <cstddef>
#include <functional>

namespace relbosons {

/// Worker count: hardware concurrency, capped by RELBOSONS_THREADS when set.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// is visited exactly once; callers write results into preallocated slots so
/// output order does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace relbosons
