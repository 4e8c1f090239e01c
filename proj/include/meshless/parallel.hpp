#pragma once

#include <cstddef>
#include <functional>

namespace meshless {

// Number of worker threads to use. Honors the MESHLESS_THREADS environment
// variable (0 or unset = hardware concurrency).
int worker_count();

// Runs fn(i) for i in [0, count) across worker threads. Iterations must be
// independent and write to disjoint locations; the partitioning is static so
// results do not depend on the number of threads.
void parallel_for(std::ptrdiff_t count, const std::function<void(std::ptrdiff_t)>& fn);

// Chunked variant: fn(begin, end) over disjoint ranges.
void parallel_for_chunks(std::ptrdiff_t count,
                         const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& fn);

}  // namespace meshless
