#pragma once

#include <span>
#include <vector>

#include "rectex/affine_unit.hpp"
#include "rectex/matrix.hpp"

namespace rectex {

struct LinearLayer {
  Matrix weights;              // fan_out x fan_in
  std::vector<double> biases;  // fan_out

  std::size_t fan_in() const { return weights.cols(); }
  std::size_t fan_out() const { return weights.rows(); }

  AffineUnit unit(std::size_t i) const {
    const auto r = weights.row(i);
    return AffineUnit{{r.begin(), r.end()}, biases[i]};
  }

  bool operator==(const LinearLayer&) const = default;
};

// Feed-forward net whose every unit applies sgn to its affine input. Two or
// three layers, single output unit. Values in [-1, +1]^k flow between layers.
struct ThresholdNetwork {
  std::size_t dim = 1;
  std::vector<LinearLayer> layers;

  int evaluate(std::span<const double> x) const;

  // Signs produced by the first hidden layer; exposed because the geometric
  // tests reason about which half-spaces a point lies in.
  std::vector<int> first_layer_signs(std::span<const double> x) const;

  void validate() const;

  bool operator==(const ThresholdNetwork&) const = default;
};

// Convenience builder for the common two-layer shape.
ThresholdNetwork make_two_layer_threshold(std::size_t dim,
                                          const std::vector<AffineUnit>& hidden,
                                          std::span<const double> output_weights,
                                          double output_bias);

}  // namespace rectex
