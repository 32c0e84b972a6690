#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mtsw {

/// Environment variable consulted when no explicit worker count is given.
inline constexpr const char* kWorkersEnv = "MTSW_WORKERS";

/// requested > 0 wins; otherwise MTSW_WORKERS; otherwise hardware concurrency.
inline unsigned resolve_workers(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(worker_index, i) for every i in [0, count). Indices are handed
/// out in chunks; results must be written to per-index slots so the outcome
/// does not depend on scheduling. The first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body, std::size_t chunk = 64) {
  workers = std::max(1u, workers);
  if (workers == 1 || count <= chunk) {
    for (std::size_t i = 0; i < count; ++i) body(0u, i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&](unsigned id) {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= count) return;
        const std::size_t end = std::min(count, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) body(id, i);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(count);
    }
  };
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, (count + chunk - 1) / chunk));
  std::vector<std::thread> threads;
  threads.reserve(used - 1);
  for (unsigned id = 1; id < used; ++id) threads.emplace_back(worker, id);
  worker(0);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mtsw
