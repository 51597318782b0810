#pragma once

#include <cstddef>
#include <functional>

namespace pcl {

struct Parallelism {
  std::size_t threads = 1;
};

/// Runs body(chunk) for chunk in [0, n_chunks), spreading contiguous ranges
/// over worker threads. Callers reduce per-chunk results in chunk order, so
/// the result never depends on the thread count.
void for_each_chunk(std::size_t n_chunks, const Parallelism& par,
                    const std::function<void(std::size_t)>& body);

/// Keeps large temporary buffers on the heap instead of mapping and unmapping
/// them on every loss evaluation, which otherwise costs as much system time
/// as the arithmetic. glibc only; a no-op elsewhere. Call once from main.
void keep_large_allocations_resident();

}  // namespace pcl
