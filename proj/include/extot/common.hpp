#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace extot {

// Error hierarchy. The C API maps each subclass to a status code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidArgument : Error {
  using Error::Error;
};
struct Infeasible : Error {
  using Error::Error;
};
struct LimitExceeded : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct InternalError : Error {
  using Error::Error;
};

// Cost values and dual potentials are carried as integer multiples of
// 2^-32. Differences and minima of lattice values are then exact, which
// makes the c-transform calculus (idempotence of the projection P, the
// lattice identities, conjugation bounds) hold bitwise rather than up to
// rounding. Doubles up to 2^20 in magnitude round-trip losslessly.
inline constexpr double kLatticeScale = 4294967296.0;  // 2^32
inline constexpr double kLatticeStep = 1.0 / kLatticeScale;
inline constexpr double kLatticeRange = 1048576.0;  // 2^20

inline std::int64_t to_units(double x) {
  if (!std::isfinite(x) || std::abs(x) > kLatticeRange) {
    throw InvalidArgument("value " + std::to_string(x) +
                          " outside representable range for exact arithmetic");
  }
  return static_cast<std::int64_t>(std::llround(x * kLatticeScale));
}

inline double from_units(std::int64_t u) {
  return static_cast<double>(u) * kLatticeStep;
}

// Sentinel for "no finite cost" (arc excluded by the coercivity cap).
inline constexpr std::int64_t kCostInf = INT64_MAX / 4;

// Deterministic 64-bit generator (splitmix64). Used for seeded test-field
// generation and tie-break permutations; stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  // Uniform dyadic value in [0, 1] with denominator 1024. Dyadic densities
  // quantize exactly under the mass quantum, so solver marginals match the
  // input bit for bit.
  double dyadic01() { return static_cast<double>(below(1025)) / 1024.0; }

  double uniform(double a, double b) {
    return a + (b - a) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::uint64_t state_;
};

// Chunked parallel map over [0, n). Work must be pure per index; the first
// exception thrown by a worker is rethrown on the calling thread.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
  if (threads <= 1 || n < 2048) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t nt =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::exception_ptr error;
  std::mutex error_mu;
  const std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body, &error, &error_mu] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

}  // namespace extot
