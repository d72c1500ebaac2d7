#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace occfof {

// Number of workers data-parallel kernels may use on the calling thread.
// 0 means "all hardware threads". The value is thread-local so that a worker
// pool running independent jobs can pin the kernels inside each job to one
// thread.
unsigned max_workers() noexcept;
void set_max_workers(unsigned workers) noexcept;

class ScopedWorkers {
 public:
  explicit ScopedWorkers(unsigned workers) noexcept : saved_(max_workers()) {
    set_max_workers(workers);
  }
  ~ScopedWorkers() { set_max_workers(saved_); }
  ScopedWorkers(const ScopedWorkers&) = delete;
  ScopedWorkers& operator=(const ScopedWorkers&) = delete;

 private:
  unsigned saved_;
};

unsigned resolved_workers() noexcept;

// Calls body(begin, end) over contiguous chunks of [0, n). Chunks never
// overlap, so bodies that write only to their own index range produce the
// same result for any worker count. The first exception thrown by any chunk
// is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(resolved_workers(), n);
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      ScopedWorkers single(1);
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace occfof
