#pragma once

#include <cstdint>
#include <functional>

namespace holo {

// Process-wide worker count for the kernels. 0 = hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Runs fn(begin..end) partitioned into contiguous chunks, one per worker.
// Chunk boundaries depend only on (begin, end, workers), never on timing,
// and every worker writes disjoint indices, so results are reproducible.
void parallel_for(int64_t begin, int64_t end, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace holo
