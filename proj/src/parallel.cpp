#include "hunfold/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace hunfold {

namespace {

int threads_from_env() {
  if (const char* env = std::getenv("THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::atomic<int>& configured_threads() {
  static std::atomic<int> n{threads_from_env()};
  return n;
}

}  // namespace

int thread_count() { return configured_threads().load(); }

void set_thread_count(int n) { configured_threads().store(n > 0 ? n : 1); }

void parallel_blocks(std::size_t n, std::size_t block_count,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  block_count = std::clamp<std::size_t>(block_count, 1, n);
  auto bounds = [&](std::size_t b) { return std::pair{n * b / block_count, n * (b + 1) / block_count}; };

  const auto workers = static_cast<std::size_t>(std::min<int>(thread_count(), static_cast<int>(block_count)));
  if (workers <= 1) {
    for (std::size_t b = 0; b < block_count; ++b) {
      const auto [lo, hi] = bounds(b);
      body(b, lo, hi);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < block_count; b = next++) {
        try {
          const auto [lo, hi] = bounds(b);
          body(b, lo, hi);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
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

}  // namespace hunfold
