#pragma once

#include <cstddef>
#include <functional>

namespace cpc {

/// Thread count to use: `requested` if positive, else CPC_THREADS, else 1.
int resolve_threads(int requested);

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks must write
/// only to their own slot; callers merge per-task results in index order, which
/// keeps results independent of the thread count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

}  // namespace cpc
