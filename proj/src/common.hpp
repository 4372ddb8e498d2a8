#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace noisescope {

enum class ErrorCode : int32_t {
  InvalidArgument = 1,
  Domain = 2,
  Config = 3,
  Evaluation = 4,
  Capability = 5,
  RejectionLimit = 6,
  Io = 7,
  Parse = 8,
  Internal = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) fail(code, message);
}

// Finalizer step of the splitmix64 generator.  Used for seed derivation only.
uint64_t splitmix64(uint64_t x);

// Independent per-stream seed; hash-based so streams can be consumed in any
// order without affecting each other.
uint64_t derive_seed(uint64_t master_seed, uint64_t stream);

// Deterministic random source.  mt19937_64 is fully specified by the
// standard; all distributions below are hand-rolled on top of its raw output
// so that identical seeds give bit-identical draws on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer on [0, bound); rejection keeps it exactly uniform.
  uint64_t uniform_below(uint64_t bound);

  // Standard normal via Box-Muller; caches the second deviate.
  double gaussian();

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

inline double sigmoid(double s) {
  if (s >= 0) {
    return 1.0 / (1.0 + std::exp(-s));
  }
  double e = std::exp(s);
  return e / (1.0 + e);
}

// log(1 + exp(s)) without overflow.
inline double log1pexp(double s) {
  if (s > 0) return s + std::log1p(std::exp(-s));
  return std::log1p(std::exp(s));
}

// Runs fn(i) for i in [0, n).  Work is split into contiguous chunks; results
// must be written to per-index slots so the outcome is independent of the
// thread count.  Thread count comes from NOISESCOPE_THREADS, else hardware.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

int thread_count();

}  // namespace noisescope
