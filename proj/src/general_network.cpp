#include "rectex/general_network.hpp"

#include <cmath>
#include <stdexcept>

#include "rectex/sgn.hpp"

namespace rectex {

double compressed_tanh(double z, double scale) { return std::tanh(scale * z); }

double compressed_tanh_grad(double z, double scale) {
  const double t = std::tanh(scale * z);
  return scale * (1.0 - t * t);
}

double GeneralNetwork::output_pre_activation(std::span<const double> x) const {
  if (x.size() != dim) throw std::invalid_argument("general network: input size mismatch");
  if (layers.empty()) throw std::invalid_argument("general network: no layers");
  std::vector<double> v(x.begin(), x.end());
  for (std::size_t li = 0; li + 1 < layers.size(); ++li) {
    const ActivatedLayer& layer = layers[li];
    std::vector<double> next(layer.linear.fan_out());
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double z = dot(layer.linear.weights.row(i), v) + layer.linear.biases[i];
      switch (layer.activation) {
        case Activation::relu:
          next[i] = rectify(z);
          break;
        case Activation::sign:
          next[i] = static_cast<double>(sgn(z));
          break;
        case Activation::compressed_tanh:
          next[i] = compressed_tanh(z, layer.ctanh_scale);
          break;
      }
    }
    v = std::move(next);
  }
  const ActivatedLayer& out = layers.back();
  return dot(out.linear.weights.row(0), v) + out.linear.biases[0];
}

int GeneralNetwork::evaluate(std::span<const double> x) const {
  return sgn(output_pre_activation(x));
}

void GeneralNetwork::validate() const {
  if (layers.empty()) throw std::invalid_argument("general network: no layers");
  std::size_t expect = dim;
  for (const ActivatedLayer& layer : layers) {
    if (layer.linear.fan_in() != expect) {
      throw std::invalid_argument("general network: layer shapes do not compose");
    }
    if (layer.linear.biases.size() != layer.linear.fan_out()) {
      throw std::invalid_argument("general network: bias count mismatch");
    }
    if (!all_finite(layer.linear.weights)) {
      throw std::invalid_argument("general network: non-finite weights");
    }
    for (double b : layer.linear.biases) {
      if (!std::isfinite(b)) throw std::invalid_argument("general network: non-finite bias");
    }
    if (layer.activation == Activation::compressed_tanh && !(layer.ctanh_scale > 0.0)) {
      throw std::invalid_argument("general network: compressed_tanh needs positive scale");
    }
    expect = layer.linear.fan_out();
  }
  if (expect != 1) {
    throw std::invalid_argument("general network: output layer must have one unit");
  }
  if (layers.back().activation != Activation::sign) {
    throw std::invalid_argument("general network: output activation must be sign");
  }
}

}  // namespace rectex
