#include "rectex/network_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace rectex {

namespace {

using nlohmann::json;

json unit_to_json(const AffineUnit& u) {
  return json{{"weights", u.weights}, {"bias", u.bias}};
}

AffineUnit unit_from_json(const json& j) {
  AffineUnit u;
  u.weights = j.at("weights").get<std::vector<double>>();
  u.bias = j.at("bias").get<double>();
  return u;
}

json layer_to_json(const LinearLayer& layer) {
  std::vector<std::vector<double>> rows(layer.fan_out());
  for (std::size_t i = 0; i < layer.fan_out(); ++i) {
    const auto r = layer.weights.row(i);
    rows[i].assign(r.begin(), r.end());
  }
  return json{{"weights", rows}, {"biases", layer.biases}};
}

LinearLayer layer_from_json(const json& j) {
  LinearLayer layer;
  layer.weights = Matrix::from_rows(j.at("weights").get<std::vector<std::vector<double>>>());
  layer.biases = j.at("biases").get<std::vector<double>>();
  return layer;
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::sign:
      return "sign";
    case Activation::compressed_tanh:
      return "compressed_tanh";
  }
  throw std::logic_error("unknown activation");
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "sign") return Activation::sign;
  if (name == "compressed_tanh") return Activation::compressed_tanh;
  throw std::invalid_argument("network file: unknown activation '" + name + "'");
}

json to_json(const NetworkFile& net) {
  json j;
  if (const auto* relu = std::get_if<ReluNetwork>(&net)) {
    j["kind"] = "relu";
    j["dim"] = relu->dim;
    j["output_bias"] = relu->output_bias;
    j["positive_units"] = json::array();
    for (const auto& u : relu->positive_units) j["positive_units"].push_back(unit_to_json(u));
    j["negative_units"] = json::array();
    for (const auto& u : relu->negative_units) j["negative_units"].push_back(unit_to_json(u));
  } else if (const auto* thr = std::get_if<ThresholdNetwork>(&net)) {
    j["kind"] = "threshold";
    j["dim"] = thr->dim;
    j["layers"] = json::array();
    for (const auto& layer : thr->layers) j["layers"].push_back(layer_to_json(layer));
  } else {
    const auto& gen = std::get<GeneralNetwork>(net);
    j["kind"] = "general";
    j["dim"] = gen.dim;
    j["layers"] = json::array();
    for (const auto& layer : gen.layers) {
      json lj = layer_to_json(layer.linear);
      lj["activation"] = activation_name(layer.activation);
      if (layer.activation == Activation::compressed_tanh) {
        lj["scale"] = layer.ctanh_scale;
      }
      j["layers"].push_back(std::move(lj));
    }
  }
  return j;
}

NetworkFile from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "relu") {
    ReluNetwork net;
    net.dim = j.at("dim").get<std::size_t>();
    net.output_bias = j.at("output_bias").get<double>();
    for (const auto& u : j.at("positive_units")) net.positive_units.push_back(unit_from_json(u));
    for (const auto& u : j.at("negative_units")) net.negative_units.push_back(unit_from_json(u));
    net.validate();
    return net;
  }
  if (kind == "threshold") {
    ThresholdNetwork net;
    net.dim = j.at("dim").get<std::size_t>();
    for (const auto& lj : j.at("layers")) net.layers.push_back(layer_from_json(lj));
    net.validate();
    return net;
  }
  if (kind == "general") {
    GeneralNetwork net;
    net.dim = j.at("dim").get<std::size_t>();
    for (const auto& lj : j.at("layers")) {
      ActivatedLayer layer;
      layer.linear = layer_from_json(lj);
      layer.activation = activation_from_name(lj.at("activation").get<std::string>());
      if (layer.activation == Activation::compressed_tanh) {
        layer.ctanh_scale = lj.at("scale").get<double>();
      }
      net.layers.push_back(std::move(layer));
    }
    net.validate();
    return net;
  }
  throw std::invalid_argument("network file: unknown kind '" + kind + "'");
}

}  // namespace

std::string to_json_text(const NetworkFile& net) { return to_json(net).dump(2); }

NetworkFile network_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed network text: ") + e.what());
  }
  return from_json(j);
}

void save_network(const std::string& path, const NetworkFile& net) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json_text(net) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

NetworkFile load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed network file " + path + ": " + e.what());
  }
  return from_json(j);
}

std::size_t network_dim(const NetworkFile& net) {
  return std::visit([](const auto& n) { return n.dim; }, net);
}

int evaluate_network(const NetworkFile& net, std::span<const double> x) {
  return std::visit([&](const auto& n) { return n.evaluate(x); }, net);
}

}  // namespace rectex
