#include "ghostsim/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

namespace ghostsim {

int default_thread_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* cap = std::getenv("GHOSTSIM_THREADS")) {
    const int limit = std::atoi(cap);
    if (limit >= 1 && limit < n) n = limit;
  }
  return n;
}

void parallel_for_chunks(
    std::int64_t total, std::int64_t chunk, int threads,
    const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (total <= 0) return;
  if (chunk < 1) chunk = 1;
  if (threads <= 0) threads = default_thread_count();
  const std::int64_t n_chunks = (total + chunk - 1) / chunk;
  if (threads == 1 || n_chunks == 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c) {
      const std::int64_t begin = c * chunk;
      fn(begin, std::min(begin + chunk, total));
    }
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= n_chunks || failed.load()) return;
      const std::int64_t begin = c * chunk;
      try {
        fn(begin, std::min(begin + chunk, total));
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(
      std::min<std::int64_t>(threads, n_chunks));
  pool.reserve(spawn);
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ghostsim
