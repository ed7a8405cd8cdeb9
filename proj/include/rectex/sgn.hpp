#pragma once

#include <cmath>
#include <stdexcept>

namespace rectex {

// Sign convention used by every classifier in this library: sgn(0) = +1,
// compared exactly, no tolerance. This is the only definition; everything
// else must call it so the boundary convention cannot drift.
inline int sgn(double z) {
  if (!std::isfinite(z)) throw std::invalid_argument("sgn: non-finite input");
  return z >= 0.0 ? 1 : -1;
}

inline double rectify(double z) { return z > 0.0 ? z : 0.0; }

}  // namespace rectex
