#include "rectex/threshold_network.hpp"

#include <cmath>
#include <stdexcept>

#include "rectex/sgn.hpp"

namespace rectex {

namespace {
std::vector<double> layer_signs(const LinearLayer& layer, std::span<const double> x) {
  std::vector<double> out(layer.fan_out());
  for (std::size_t i = 0; i < layer.fan_out(); ++i) {
    out[i] = static_cast<double>(sgn(dot(layer.weights.row(i), x) + layer.biases[i]));
  }
  return out;
}
}  // namespace

int ThresholdNetwork::evaluate(std::span<const double> x) const {
  if (x.size() != dim) throw std::invalid_argument("threshold network: input size mismatch");
  std::vector<double> v(x.begin(), x.end());
  for (const LinearLayer& layer : layers) {
    v = layer_signs(layer, v);
  }
  if (v.size() != 1) throw std::logic_error("threshold network: output is not scalar");
  return v[0] >= 0.0 ? 1 : -1;
}

std::vector<int> ThresholdNetwork::first_layer_signs(std::span<const double> x) const {
  if (layers.empty()) throw std::invalid_argument("threshold network: no layers");
  if (x.size() != dim) throw std::invalid_argument("threshold network: input size mismatch");
  const std::vector<double> v = layer_signs(layers.front(), x);
  std::vector<int> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] >= 0.0 ? 1 : -1;
  return out;
}

void ThresholdNetwork::validate() const {
  if (layers.size() < 2 || layers.size() > 3) {
    throw std::invalid_argument("threshold network: expected 2 or 3 layers");
  }
  std::size_t expect = dim;
  for (const LinearLayer& layer : layers) {
    if (layer.fan_in() != expect) {
      throw std::invalid_argument("threshold network: layer shapes do not compose");
    }
    if (layer.biases.size() != layer.fan_out()) {
      throw std::invalid_argument("threshold network: bias count mismatch");
    }
    if (!all_finite(layer.weights)) {
      throw std::invalid_argument("threshold network: non-finite weights");
    }
    for (double b : layer.biases) {
      if (!std::isfinite(b)) throw std::invalid_argument("threshold network: non-finite bias");
    }
    expect = layer.fan_out();
  }
  if (expect != 1) throw std::invalid_argument("threshold network: output layer must have one unit");
}

ThresholdNetwork make_two_layer_threshold(std::size_t dim,
                                          const std::vector<AffineUnit>& hidden,
                                          std::span<const double> output_weights,
                                          double output_bias) {
  if (hidden.size() != output_weights.size()) {
    throw std::invalid_argument("make_two_layer_threshold: weight count mismatch");
  }
  ThresholdNetwork net;
  net.dim = dim;
  LinearLayer first;
  first.weights = Matrix(hidden.size(), dim);
  first.biases.resize(hidden.size());
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (hidden[i].weights.size() != dim) {
      throw std::invalid_argument("make_two_layer_threshold: unit dimension mismatch");
    }
    for (std::size_t j = 0; j < dim; ++j) first.weights(i, j) = hidden[i].weights[j];
    first.biases[i] = hidden[i].bias;
  }
  LinearLayer out;
  out.weights = Matrix(1, hidden.size());
  for (std::size_t i = 0; i < hidden.size(); ++i) out.weights(0, i) = output_weights[i];
  out.biases = {output_bias};
  net.layers = {std::move(first), std::move(out)};
  net.validate();
  return net;
}

}  // namespace rectex
