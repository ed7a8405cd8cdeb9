#pragma once

#include <span>
#include <vector>

#include "rectex/affine_unit.hpp"

namespace rectex {

// Two-layer rectifier classifier in normal form: the output weight of every
// hidden unit is +1 or -1, recorded by membership in positive_units or
// negative_units. Arbitrary output magnitudes are absorbed into the unit
// weights by from_weighted_units. Networks are values; operations that
// transform them return new ones.
struct ReluNetwork {
  std::size_t dim = 1;
  std::vector<AffineUnit> positive_units;
  std::vector<AffineUnit> negative_units;
  double output_bias = 0.0;

  std::size_t unit_count() const {
    return positive_units.size() + negative_units.size();
  }

  double pre_activation(std::span<const double> x) const;
  int evaluate(std::span<const double> x) const;

  // Folds signed output weights c_k into the units: c * rect(u.x + b) equals
  // sgn(c) * rect(|c|u.x + |c|b). Units with zero output weight are dropped.
  static ReluNetwork from_weighted_units(std::size_t dim,
                                         const std::vector<AffineUnit>& hidden,
                                         std::span<const double> output_weights,
                                         double output_bias);

  void validate() const;

  bool operator==(const ReluNetwork&) const = default;
};

}  // namespace rectex
