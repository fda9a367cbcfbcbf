#pragma once

#include <cstddef>
#include <functional>

namespace spanpca {

/// Number of worker threads used by library loops. Initialised from the
/// SPCA_THREADS environment variable (0 or unset = hardware concurrency).
std::size_t worker_count();

/// Override the worker count; 0 restores the automatic choice.
void set_worker_count(std::size_t workers);

/// Splits [0, count) into contiguous chunks and runs body(begin, end) on
/// each chunk, possibly concurrently. Callers must merge per-chunk results
/// in a way that does not depend on the chunk boundaries.
void parallel_chunks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace spanpca
