#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace rectex {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Combines a seed with a stream label into an independent stream id, so
// subsystems can draw from disjoint deterministic streams of one seed.
inline std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
  std::uint64_t h = detail::mix64(a);
  h = detail::mix64(h ^ (b + 0x517cc1b727220a95ULL));
  h = detail::mix64(h ^ (c + 0x2545f4914f6cdd1dULL));
  return h;
}

// Counter-based splitmix64 generator. A (seed, stream) pair fully determines
// the sequence; identical pairs give identical bytes on every platform.
class SplitRng {
 public:
  SplitRng(std::uint64_t seed, std::uint64_t stream)
      : state_(detail::mix64(seed) ^ detail::mix64(stream * 0xda942042e4dd58b5ULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the spare of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  // Uniform integer in [0, bound); bound must be positive. Rejection-free
  // modulo is fine here: bound is tiny relative to 2^64 in every use.
  std::size_t below(std::size_t bound) { return next_u64() % bound; }

  bool coin() { return (next_u64() & 1ULL) != 0ULL; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rectex
