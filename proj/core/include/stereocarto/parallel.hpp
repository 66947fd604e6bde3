#pragma once

#include <cstddef>
#include <functional>

namespace stereocarto {

/// Worker count for internally parallel stages. Reads STEREOCARTO_THREADS
/// (a positive integer) and falls back to the hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count). Iterations must write disjoint
/// outputs; the first exception thrown by any iteration is rethrown on the
/// calling thread after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace stereocarto
