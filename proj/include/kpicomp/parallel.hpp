#pragma once

#include <cstddef>
#include <functional>

namespace kpicomp {

/// Worker count: KPICOMP_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) over at most thread_count() threads.
/// Callers write results into per-index slots, so output order never depends on scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace kpicomp
