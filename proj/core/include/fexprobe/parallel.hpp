#pragma once

#include <cstddef>
#include <functional>

namespace fexprobe {

/// Worker count from FEXPROBE_THREADS when set to a positive integer,
/// otherwise std::thread::hardware_concurrency() (at least 1).
std::size_t default_thread_count();

/// Runs task(i) for i in [0, n_tasks) on up to `threads` workers (0 means
/// default_thread_count()). Tasks are claimed dynamically; callers must
/// write disjoint outputs. If tasks throw, the exception of the lowest
/// failing index is rethrown after all workers have stopped.
void parallel_for(std::size_t n_tasks, std::size_t threads,
                  const std::function<void(std::size_t)>& task);

}  // namespace fexprobe
