#include "rectex/relu_network.hpp"

#include <cmath>
#include <stdexcept>

#include "rectex/sgn.hpp"

namespace rectex {

double ReluNetwork::pre_activation(std::span<const double> x) const {
  if (x.size() != dim) throw std::invalid_argument("relu network: input size mismatch");
  double z = output_bias;
  for (const AffineUnit& u : positive_units) z += rectify(u.pre_activation(x));
  for (const AffineUnit& u : negative_units) z -= rectify(u.pre_activation(x));
  return z;
}

int ReluNetwork::evaluate(std::span<const double> x) const {
  return sgn(pre_activation(x));
}

ReluNetwork ReluNetwork::from_weighted_units(std::size_t dim,
                                             const std::vector<AffineUnit>& hidden,
                                             std::span<const double> output_weights,
                                             double output_bias) {
  if (hidden.size() != output_weights.size()) {
    throw std::invalid_argument("from_weighted_units: weight count mismatch");
  }
  ReluNetwork net;
  net.dim = dim;
  net.output_bias = output_bias;
  for (std::size_t k = 0; k < hidden.size(); ++k) {
    const double c = output_weights[k];
    if (c == 0.0) continue;
    const double mag = std::abs(c);
    AffineUnit scaled;
    scaled.weights.reserve(hidden[k].weights.size());
    for (double w : hidden[k].weights) scaled.weights.push_back(mag * w);
    scaled.bias = mag * hidden[k].bias;
    if (c > 0.0) {
      net.positive_units.push_back(std::move(scaled));
    } else {
      net.negative_units.push_back(std::move(scaled));
    }
  }
  net.validate();
  return net;
}

void ReluNetwork::validate() const {
  if (!std::isfinite(output_bias)) {
    throw std::invalid_argument("relu network: non-finite output bias");
  }
  auto check = [&](const std::vector<AffineUnit>& units) {
    for (const AffineUnit& u : units) {
      if (u.weights.size() != dim) {
        throw std::invalid_argument("relu network: unit dimension mismatch");
      }
      if (!u.finite()) throw std::invalid_argument("relu network: non-finite unit");
    }
  };
  check(positive_units);
  check(negative_units);
}

}  // namespace rectex
