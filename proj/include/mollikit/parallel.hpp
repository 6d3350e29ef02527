#pragma once

#include <cstddef>
#include <functional>

namespace mollikit {

/// Worker count used by point-parallel loops. Defaults to MOLLIKIT_THREADS, else 1.
int thread_count();
void set_thread_count(int threads);

/// Calls fn(i) for i in [0, n) split into contiguous blocks, one per worker.
/// Each index is visited exactly once, so writes to per-index slots are race-free and the
/// result never depends on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mollikit
