#pragma once

#include <cstddef>
#include <functional>

namespace wkam {

/// Number of worker threads used by parallel loops. 0 selects the hardware
/// concurrency. The setting is process-wide.
void set_worker_count(unsigned workers);
unsigned worker_count();

/// Runs body(i) for i in [0, n). Iterations are split into contiguous blocks,
/// one per worker; bodies must only write to slots owned by their index, so
/// results never depend on the number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Same partition as parallel_for, but hands each worker its whole range [lo, hi).
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace wkam
