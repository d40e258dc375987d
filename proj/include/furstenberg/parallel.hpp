#pragma once

#include <cstddef>
#include <functional>

namespace furstenberg {

// Upper bound on worker threads used by the estimators (0 = hardware concurrency).
void set_max_jobs(std::size_t jobs);
std::size_t max_jobs();

// Runs body(i) for i in [0, count). Each index is independent and writes only
// its own output slot, so results do not depend on the number of threads.
// If several bodies throw, the exception of the lowest index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace furstenberg
