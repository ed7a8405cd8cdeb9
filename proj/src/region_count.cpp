#include "rectex/region_count.hpp"

#include <limits>
#include <stdexcept>

namespace rectex {

std::uint64_t region_count(std::uint64_t n, std::uint64_t d) {
  if (d < 1) throw std::invalid_argument("region_count: dimension must be positive");

  using u128 = unsigned __int128;
  constexpr std::uint64_t limit = std::numeric_limits<std::uint64_t>::max();
  constexpr u128 limit128 = ~static_cast<u128>(0);

  const std::uint64_t smax = d < n ? d : n;
  u128 total = 0;
  u128 term = 1;  // binomial(n, s), updated incrementally
  for (std::uint64_t s = 0;; ++s) {
    total += term;
    if (total > limit) throw std::overflow_error("region_count: result exceeds 64 bits");
    if (s == smax) break;
    const u128 num = n - s;
    if (num != 0 && term > limit128 / num) {
      throw std::overflow_error("region_count: result exceeds 64 bits");
    }
    term = term * num / (s + 1);
  }
  return static_cast<std::uint64_t>(total);
}

}  // namespace rectex
