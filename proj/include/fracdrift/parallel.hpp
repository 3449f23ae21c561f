#pragma once

#include <cstddef>
#include <functional>

namespace fracdrift {

/// Worker count: FRACDRIFT_THREADS if set and positive, otherwise hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on a pool of worker_count() threads.
/// Each index is visited exactly once; callers write results into per-index
/// slots so the output does not depend on scheduling. The first exception
/// thrown by any body is rethrown after all workers have stopped. Calls made
/// from inside a body run serially on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace fracdrift
