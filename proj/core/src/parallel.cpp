#include "fouriermix/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fouriermix {

namespace {
std::atomic<unsigned> g_threads{1};
// Nested parallel_for calls run inline on the calling worker.
thread_local bool t_in_parallel = false;

struct ParallelScope {
  bool previous;
  ParallelScope() : previous(t_in_parallel) { t_in_parallel = true; }
  ~ParallelScope() { t_in_parallel = previous; }
};
} // namespace

void set_thread_count(unsigned n) {
  if (n == 0)
    n = std::max(1u, std::thread::hardware_concurrency());
  g_threads.store(n);
}

unsigned thread_count() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = t_in_parallel ? 1 : std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run = [&] {
    ParallelScope scope;
    for (;;) {
      if (failed.load(std::memory_order_relaxed))
        return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n)
        return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error)
          first_error = std::current_exception();
        failed.store(true);
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w)
    pool.emplace_back(run);
  run();
  pool.clear();

  if (first_error)
    std::rethrow_exception(first_error);
}

} // namespace fouriermix
