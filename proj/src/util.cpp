#include "dmo/util.hpp"

#include <algorithm>
#include <exception>
#include <mutex>

namespace dmo {

int& thread_budget() {
  static int budget = 0;
  return budget;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  int workers = thread_budget();
  if (workers <= 0) workers = int(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = int(std::min<std::size_t>(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  std::mutex mu;
  std::exception_ptr first_error;
  std::size_t first_error_index = count;
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (i < first_error_index) {
            first_error_index = i;
            first_error = std::current_exception();
          }
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace dmo
