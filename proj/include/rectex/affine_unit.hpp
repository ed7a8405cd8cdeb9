#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "rectex/matrix.hpp"

namespace rectex {

// One affine form u.x + b. Hidden units of every network type reduce to this.
struct AffineUnit {
  std::vector<double> weights;
  double bias = 0.0;

  double pre_activation(std::span<const double> x) const {
    return dot(weights, x) + bias;
  }

  bool finite() const {
    if (!std::isfinite(bias)) return false;
    for (double w : weights) {
      if (!std::isfinite(w)) return false;
    }
    return true;
  }

  bool operator==(const AffineUnit&) const = default;
};

}  // namespace rectex
