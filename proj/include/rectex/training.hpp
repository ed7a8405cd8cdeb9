#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rectex/general_network.hpp"
#include "rectex/relu_network.hpp"

namespace rectex {

// Labeled points with the trailing `test_count` rows held out. Everything
// before them is the training split.
struct Dataset {
  std::size_t dim = 0;
  std::vector<std::vector<double>> points;
  std::vector<int> labels;  // +1 / -1
  std::size_t test_count = 0;

  std::size_t size() const { return points.size(); }
  std::size_t train_count() const { return points.size() - test_count; }
  void validate() const;
};

struct TrainConfig {
  std::size_t hidden_units = 1;
  Activation activation = Activation::relu;  // relu or compressed_tanh
  double ctanh_scale = 10000.0;
  std::vector<double> lr_grid = {1.0, 0.1, 0.01, 0.001, 0.0001};
  double l2 = 1e-4;              // applied to weight matrices, not biases
  std::size_t max_epochs = 1000;
  std::size_t batch_size = 20;
  std::size_t patience = 50;     // epochs without validation improvement
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct TrainResult {
  GeneralNetwork network;
  double train_error = 0.0;
  double test_error = 0.0;
  double chosen_lr = 0.0;
  std::size_t epochs_run = 0;
  std::vector<double> loss_curve;  // one entry per epoch actually run
};

// Random two-layer rectifier labeler: unit weights, biases and the output
// bias are standard normal, each unit's output sign is a fair coin. Draws
// are repeated (bounded) until a 10,000-point probe shows at least 5% of
// each class, so generated datasets are never near-constant.
ReluNetwork random_labeling_network(std::size_t n, std::size_t d, std::uint64_t seed);

// The labeler's minority-class share measured on a fresh standard-normal
// probe sample.
double probe_minority_fraction(const ReluNetwork& net, std::size_t probe_count,
                               std::uint64_t seed);

// Standard-normal points labeled by the network; the last `test` points are
// the held-out split.
Dataset make_dataset(const ReluNetwork& net, std::size_t total, std::size_t test,
                     std::uint64_t seed);

// Minibatch SGD on the logistic loss with L2 weight decay. The learning rate
// comes from the grid: each candidate trains with early stopping against a
// 10% validation slice of the training split, the best validation error
// wins, and its best-epoch snapshot becomes the result. Runs that produce
// non-finite losses or parameters are discarded; if every rate diverges the
// call throws. Identical (dataset, config) pairs give bit-identical results.
TrainResult train(const Dataset& data, const TrainConfig& config);

struct ExperimentRow {
  std::size_t n = 0;
  std::size_t d = 0;
  std::string setting;  // "relu", "ctanh", "ctanh_wide"
  double train_error = 0.0;
  double test_error = 0.0;
  double chosen_lr = 0.0;
  std::size_t epochs = 0;
};

struct ExperimentOptions {
  std::size_t total_examples = 10000;
  std::size_t test_examples = 1500;
  std::size_t max_epochs = 1000;
  std::size_t hidden_cap = 1024;  // refuse ctanh_wide beyond this width
};

// For every (n, d) pair: draw a labeling network with n units in dimension
// d, sample one dataset, and fit three students on it — rectifiers of the
// matching width, squashed-tanh units of the matching width, and
// squashed-tanh units at width 2^n. Three rows per dataset.
std::vector<ExperimentRow> run_experiment(
    const std::vector<std::size_t>& dims, const std::vector<std::size_t>& ns,
    std::uint64_t seed, const ExperimentOptions& options = {},
    const std::function<void(std::size_t n, std::size_t d, const ReluNetwork&,
                             const Dataset&)>& on_dataset = nullptr);

}  // namespace rectex
