#pragma once

#include <cstdint>

namespace rectex {

// Number of cells that n hyperplanes in general position cut R^d into:
// sum over s = 0..d of (n choose s). Equals 2^n once d >= n. Throws
// std::overflow_error if the count does not fit in 64 bits and
// std::invalid_argument if d < 1.
std::uint64_t region_count(std::uint64_t n, std::uint64_t d);

}  // namespace rectex
