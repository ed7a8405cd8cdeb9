#pragma once

#include <span>
#include <vector>

#include "rectex/matrix.hpp"
#include "rectex/threshold_network.hpp"

namespace rectex {

enum class Activation { relu, sign, compressed_tanh };

// compressed_tanh(z) = tanh(scale * z); large scales squeeze the transition
// into a narrow band around zero so the unit behaves like a soft sign.
double compressed_tanh(double z, double scale);
double compressed_tanh_grad(double z, double scale);

struct ActivatedLayer {
  LinearLayer linear;
  Activation activation = Activation::relu;
  double ctanh_scale = 0.0;  // used only by compressed_tanh

  bool operator==(const ActivatedLayer&) const = default;
};

// Mixed-activation feed-forward classifier. The output layer is always a
// single sign unit; hidden layers may rectify, threshold, or squash.
struct GeneralNetwork {
  std::size_t dim = 1;
  std::vector<ActivatedLayer> layers;

  double output_pre_activation(std::span<const double> x) const;
  int evaluate(std::span<const double> x) const;

  void validate() const;

  bool operator==(const GeneralNetwork&) const = default;
};

}  // namespace rectex
