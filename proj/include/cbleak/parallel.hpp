#pragma once

#include <cstddef>
#include <functional>

namespace cbleak {

// Runs fn(0..count-1) across up to `jobs` worker threads. Completion order
// is arbitrary; callers index into preallocated output slots so results
// stay deterministic. The first exception thrown by fn is rethrown after
// all workers finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

std::size_t default_jobs();

}  // namespace cbleak
