#pragma once

#include <string>
#include <variant>

#include "rectex/general_network.hpp"
#include "rectex/relu_network.hpp"
#include "rectex/threshold_network.hpp"

namespace rectex {

// One network of any of the three kinds, as stored on disk. The JSON schema
// is {"kind": "relu"|"threshold"|"general", "dim": ..., ...payload}; doubles
// survive a save/load cycle bit-exactly.
using NetworkFile = std::variant<ReluNetwork, ThresholdNetwork, GeneralNetwork>;

std::string to_json_text(const NetworkFile& net);
NetworkFile network_from_json_text(const std::string& text);

void save_network(const std::string& path, const NetworkFile& net);
NetworkFile load_network(const std::string& path);

std::size_t network_dim(const NetworkFile& net);
int evaluate_network(const NetworkFile& net, std::span<const double> x);

}  // namespace rectex
