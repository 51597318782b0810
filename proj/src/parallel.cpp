#include "pcl/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace pcl {

void for_each_chunk(std::size_t n_chunks, const Parallelism& par,
                    const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(std::max<std::size_t>(1, par.threads), n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) body(c);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = n_chunks * w / workers;
      const std::size_t end = n_chunks * (w + 1) / workers;
      try {
        for (std::size_t c = begin; c < end; ++c) body(c);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void keep_large_allocations_resident() {
#ifdef __GLIBC__
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace pcl
