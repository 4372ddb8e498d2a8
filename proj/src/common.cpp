#include "common.hpp"

#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace noisescope {

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t master_seed, uint64_t stream) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(~stream));
}

uint64_t Rng::uniform_below(uint64_t bound) {
  require(bound > 0, ErrorCode::InvalidArgument, "uniform_below: bound must be positive");
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

double Rng::gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

int thread_count() {
  if (const char* env = std::getenv("NOISESCOPE_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int64_t n, const std::function<void(int64_t)>& fn) {
  if (n <= 0) return;
  int threads = thread_count();
  if (threads <= 1 || n == 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (static_cast<int64_t>(threads) > n) threads = static_cast<int>(n);

  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::mutex error_mutex;
  std::exception_ptr first_error;

  for (int t = 0; t < threads; ++t) {
    int64_t begin = n * t / threads;
    int64_t end = n * (t + 1) / threads;
    pool.emplace_back([&, begin, end]() {
      try {
        for (int64_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace noisescope
