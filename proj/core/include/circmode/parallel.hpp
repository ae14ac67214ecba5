#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace circmode {

//! Number of workers to use when the caller asks for 0 ("auto").
inline unsigned resolve_workers(unsigned requested)
{
  if (requested > 0)
    return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

//! Calls fn(i) for every i in [0, count) on up to `workers` threads.
//!
//! Work is handed out by an atomic counter. Results must be written by
//! index; the first exception (lowest index) is rethrown after all
//! workers stop.
template<typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn)
{
  workers = static_cast<unsigned>(
    std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }

  std::atomic<std::size_t> next{ 0 };
  std::atomic<bool> failed{ false };
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;

  auto work = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed))
        return;
      std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count)
        return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back(work);
  pool.clear();

  if (error)
    std::rethrow_exception(error);
}

} // namespace circmode
