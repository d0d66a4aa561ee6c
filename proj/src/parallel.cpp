#include "anisofrac/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace anisofrac {

namespace {
std::atomic<int> configured_threads{0};

int env_threads() {
  const char* raw = std::getenv("ANISOFRAC_THREADS");
  if (raw == nullptr) return 0;
  try {
    return std::max(0, std::stoi(raw));
  } catch (...) {
    return 0;
  }
}
}  // namespace

void set_thread_count(int count) { configured_threads = std::max(0, count); }

int thread_count() {
  if (int n = configured_threads.load(); n > 0) return n;
  if (int n = env_threads(); n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace anisofrac
