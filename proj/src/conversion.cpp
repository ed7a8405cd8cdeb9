#include "rectex/conversion.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "rectex/errors.hpp"
#include "rectex/sgn.hpp"

namespace rectex {

namespace {

// Hard ceiling on first-layer enumeration, independent of any caller cap.
constexpr std::size_t absolute_first_layer_limit = 1u << 30;

std::size_t checked_first_layer_units(const ReluNetwork& net, std::size_t cap) {
  const std::size_t total = net.positive_units.size() + net.negative_units.size();
  if (total >= 31) {
    throw guard_error("conversion: first layer would exceed the absolute enumeration limit");
  }
  const std::size_t units = static_cast<std::size_t>(1) << total;
  if (units > cap) {
    throw guard_error("conversion: first layer of " + std::to_string(units) +
                      " units exceeds the cap of " + std::to_string(cap));
  }
  if (units > absolute_first_layer_limit) {
    throw guard_error("conversion: first layer would exceed the absolute enumeration limit");
  }
  return units;
}

// Pre-activations of one unit bank at x.
std::vector<double> bank_values(const std::vector<AffineUnit>& units,
                                std::span<const double> x) {
  std::vector<double> v(units.size());
  for (std::size_t k = 0; k < units.size(); ++k) v[k] = units[k].pre_activation(x);
  return v;
}

// sums[mask] = sum of values[k] over the set bits of mask.
std::vector<double> subset_sums(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> sums(static_cast<std::size_t>(1) << n, 0.0);
  for (std::size_t mask = 1; mask < sums.size(); ++mask) {
    const int low = std::countr_zero(mask);
    sums[mask] = sums[mask & (mask - 1)] + values[static_cast<std::size_t>(low)];
  }
  return sums;
}

void check_enumeration_guard(const ReluNetwork& net) {
  if (net.unit_count() > 20) {
    throw guard_error("subset enumeration: more than 20 hidden units");
  }
}

struct FirstLayer {
  LinearLayer layer;
  std::size_t units;
};

// Builds the bank of inequality units. index_of(s1, s2) decides the layout;
// dnf wants runs of constant s1, cnf runs of constant s2.
template <typename IndexOf>
FirstLayer build_first_layer(const ReluNetwork& net, std::size_t cap, IndexOf index_of) {
  const std::size_t n1 = net.positive_units.size();
  const std::size_t n2 = net.negative_units.size();
  const std::size_t units = checked_first_layer_units(net, cap);
  FirstLayer out;
  out.units = units;
  out.layer.weights = Matrix(units, net.dim);
  out.layer.biases.resize(units);
  for (std::uint64_t s1 = 0; s1 < (1ull << n1); ++s1) {
    for (std::uint64_t s2 = 0; s2 < (1ull << n2); ++s2) {
      const AffineUnit unit = subset_inequality_unit(net, SubsetPair{s1, s2});
      const std::size_t i = index_of(s1, s2);
      for (std::size_t j = 0; j < net.dim; ++j) out.layer.weights(i, j) = unit.weights[j];
      out.layer.biases[i] = unit.bias;
    }
  }
  return out;
}

// Second layer with `groups` units, each an AND (and_gate) or OR over a
// contiguous block of `group_size` inputs. AND of m signs fires at bias
// 1 - m, OR at m - 1.
LinearLayer grouped_gate_layer(std::size_t groups, std::size_t group_size, bool and_gate) {
  LinearLayer layer;
  layer.weights = Matrix(groups, groups * group_size);
  const double m = static_cast<double>(group_size);
  layer.biases.assign(groups, and_gate ? 1.0 - m : m - 1.0);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < group_size; ++i) {
      layer.weights(g, g * group_size + i) = 1.0;
    }
  }
  return layer;
}

LinearLayer output_gate_layer(std::size_t inputs, bool and_gate) {
  LinearLayer layer;
  layer.weights = Matrix(1, inputs, 1.0);
  const double m = static_cast<double>(inputs);
  layer.biases = {and_gate ? 1.0 - m : m - 1.0};
  return layer;
}

}  // namespace

AffineUnit subset_inequality_unit(const ReluNetwork& net, SubsetPair subsets) {
  const std::size_t n1 = net.positive_units.size();
  const std::size_t n2 = net.negative_units.size();
  if (n1 < 64 && subsets.positive_mask >= (1ull << n1)) {
    throw std::invalid_argument("subset_inequality_unit: positive mask out of range");
  }
  if (n2 < 64 && subsets.negative_mask >= (1ull << n2)) {
    throw std::invalid_argument("subset_inequality_unit: negative mask out of range");
  }
  AffineUnit unit;
  unit.weights.assign(net.dim, 0.0);
  unit.bias = net.output_bias;
  for (std::size_t k = 0; k < n1; ++k) {
    if ((subsets.positive_mask >> k) & 1ull) {
      const AffineUnit& u = net.positive_units[k];
      for (std::size_t j = 0; j < net.dim; ++j) unit.weights[j] += u.weights[j];
      unit.bias += u.bias;
    }
  }
  for (std::size_t k = 0; k < n2; ++k) {
    if ((subsets.negative_mask >> k) & 1ull) {
      const AffineUnit& u = net.negative_units[k];
      for (std::size_t j = 0; j < net.dim; ++j) unit.weights[j] -= u.weights[j];
      unit.bias -= u.bias;
    }
  }
  return unit;
}

ThresholdConversion to_threshold_dnf(const ReluNetwork& net, std::size_t first_layer_cap) {
  net.validate();
  const std::size_t n1 = net.positive_units.size();
  const std::size_t n2 = net.negative_units.size();
  FirstLayer first = build_first_layer(
      net, first_layer_cap,
      [&](std::uint64_t s1, std::uint64_t s2) { return (s1 << n2) | s2; });

  ThresholdConversion out;
  out.report = {n1, n2, first.units, static_cast<std::size_t>(1) << n1, NormalForm::dnf};
  out.network.dim = net.dim;
  out.network.layers.push_back(std::move(first.layer));
  // A positive subset wins only if it beats every negative subset: AND over
  // its group of 2^n2 inequality units, then OR over the 2^n1 groups.
  out.network.layers.push_back(grouped_gate_layer(1u << n1, 1u << n2, /*and_gate=*/true));
  out.network.layers.push_back(output_gate_layer(1u << n1, /*and_gate=*/false));
  out.network.validate();
  return out;
}

ThresholdConversion to_threshold_cnf(const ReluNetwork& net, std::size_t first_layer_cap) {
  net.validate();
  const std::size_t n1 = net.positive_units.size();
  const std::size_t n2 = net.negative_units.size();
  FirstLayer first = build_first_layer(
      net, first_layer_cap,
      [&](std::uint64_t s1, std::uint64_t s2) { return (s2 << n1) | s1; });

  ThresholdConversion out;
  out.report = {n1, n2, first.units, static_cast<std::size_t>(1) << n2, NormalForm::cnf};
  out.network.dim = net.dim;
  out.network.layers.push_back(std::move(first.layer));
  // Every negative subset must be beaten by some positive subset: OR within
  // each group of 2^n1 inequality units, then AND over the 2^n2 groups.
  out.network.layers.push_back(grouped_gate_layer(1u << n2, 1u << n1, /*and_gate=*/false));
  out.network.layers.push_back(output_gate_layer(1u << n2, /*and_gate=*/true));
  out.network.validate();
  return out;
}

int classify_exists_forall(const ReluNetwork& net, std::span<const double> x) {
  net.validate();
  check_enumeration_guard(net);
  if (x.size() != net.dim) throw std::invalid_argument("classify: input size mismatch");
  const std::vector<double> pos_sums = subset_sums(bank_values(net.positive_units, x));
  const std::vector<double> neg_sums = subset_sums(bank_values(net.negative_units, x));
  for (const double p : pos_sums) {
    bool beats_all = true;
    for (const double q : neg_sums) {
      if (net.output_bias + p - q < 0.0) {
        beats_all = false;
        break;
      }
    }
    if (beats_all) return 1;
  }
  return -1;
}

int classify_forall_exists(const ReluNetwork& net, std::span<const double> x) {
  net.validate();
  check_enumeration_guard(net);
  if (x.size() != net.dim) throw std::invalid_argument("classify: input size mismatch");
  const std::vector<double> pos_sums = subset_sums(bank_values(net.positive_units, x));
  const std::vector<double> neg_sums = subset_sums(bank_values(net.negative_units, x));
  for (const double q : neg_sums) {
    bool beaten = false;
    for (const double p : pos_sums) {
      if (net.output_bias + p - q >= 0.0) {
        beaten = true;
        break;
      }
    }
    if (!beaten) return -1;
  }
  return 1;
}

SurrogatePair sign_surrogate_pair(const AffineUnit& unit, double margin) {
  if (!(margin > 0.0)) throw std::invalid_argument("sign_surrogate_pair: margin must be positive");
  SurrogatePair pair;
  pair.above = unit;
  pair.above.bias += margin;
  pair.below = unit;
  pair.below.bias -= margin;
  return pair;
}

ReluNetwork approximate_with_rectifiers(const ThresholdNetwork& net, double margin) {
  net.validate();
  if (net.layers.size() != 2) {
    throw std::invalid_argument("approximate_with_rectifiers: expected a two-layer network");
  }
  if (!(margin > 0.0)) {
    throw std::invalid_argument("approximate_with_rectifiers: margin must be positive");
  }
  const LinearLayer& hidden = net.layers[0];
  const LinearLayer& out = net.layers[1];

  // sgn(z) agrees with (rect(z + margin) - rect(z - margin)) / margin - 1
  // whenever |z| >= margin, so each sign unit becomes two rectifiers with
  // output weights +-w/margin and the skipped "-1" folds into the bias.
  std::vector<AffineUnit> units;
  std::vector<double> weights;
  units.reserve(2 * hidden.fan_out());
  weights.reserve(2 * hidden.fan_out());
  double bias = out.biases[0];
  for (std::size_t k = 0; k < hidden.fan_out(); ++k) {
    const double w = out.weights(0, k);
    const SurrogatePair pair = sign_surrogate_pair(hidden.unit(k), margin);
    units.push_back(pair.above);
    weights.push_back(w / margin);
    units.push_back(pair.below);
    weights.push_back(-w / margin);
    bias -= w;
  }
  return ReluNetwork::from_weighted_units(net.dim, units, weights, bias);
}

ReluNetwork compress_sign_triple(const AffineUnit& a, const AffineUnit& b,
                                 const AffineUnit& c) {
  const std::size_t d = a.weights.size();
  if (b.weights.size() != d || c.weights.size() != d) {
    throw std::invalid_argument("compress_sign_triple: dimension mismatch");
  }
  constexpr double tol = 1e-9;

  // Least squares for c.weights ~ p*a.weights + q*b.weights via the normal
  // equations; fall back to single-vector fits when the Gram matrix is
  // singular.
  const double aa = dot(a.weights, a.weights);
  const double bb = dot(b.weights, b.weights);
  const double ab = dot(a.weights, b.weights);
  const double ac = dot(a.weights, c.weights);
  const double bc = dot(b.weights, c.weights);
  const double det = aa * bb - ab * ab;

  double p = 0.0;
  double q = 0.0;
  const double scale = std::max({aa, bb, 1.0});
  if (std::abs(det) > 1e-12 * scale * scale) {
    p = (bb * ac - ab * bc) / det;
    q = (aa * bc - ab * ac) / det;
  } else if (aa > 0.0) {
    p = ac / aa;
  } else if (bb > 0.0) {
    q = bc / bb;
  }

  double residual_sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double r = c.weights[j] - p * a.weights[j] - q * b.weights[j];
    residual_sq += r * r;
  }
  if (std::sqrt(residual_sq) > tol) {
    throw not_coplanar_error("compress_sign_triple: third weight vector is not spanned by the first two");
  }

  const double denom = c.bias - p * a.bias - q * b.bias;
  if (std::abs(denom) <= tol) {
    throw bias_dependent_error("compress_sign_triple: bias satisfies the same dependency, no scale exists");
  }
  const double r = 1.0 / denom;

  std::vector<AffineUnit> units(2);
  units[0].weights.resize(d);
  units[1].weights.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    units[0].weights[j] = p * r * a.weights[j];
    units[1].weights[j] = q * r * b.weights[j];
  }
  units[0].bias = p * r * a.bias + 1.0;
  units[1].bias = q * r * b.bias + 1.0;

  ReluNetwork net;
  net.dim = d;
  net.positive_units = std::move(units);
  net.output_bias = -1.0;
  net.validate();
  return net;
}

ReluNetwork make_axis_disjunction_network(std::size_t n, std::size_t d) {
  if (n < 1) throw std::invalid_argument("axis disjunction: need at least one coordinate");
  if (d < n) throw std::invalid_argument("axis disjunction: dimension must be at least n");
  ReluNetwork net;
  net.dim = d;
  net.output_bias = -1.0;
  net.positive_units.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    net.positive_units[k].weights.assign(d, 0.0);
    net.positive_units[k].weights[k] = 1.0;
    net.positive_units[k].bias = 0.0;
  }
  return net;
}

std::vector<double> axis_disjunction_witness(std::size_t n, std::size_t d,
                                             std::uint64_t subset_mask) {
  if (n < 1 || d < n) throw std::invalid_argument("axis disjunction witness: bad shape");
  if (subset_mask == 0) {
    throw std::invalid_argument("axis disjunction witness: subset must be nonempty");
  }
  if (n < 64 && subset_mask >= (1ull << n)) {
    throw std::invalid_argument("axis disjunction witness: mask out of range");
  }
  const std::size_t s = static_cast<std::size_t>(std::popcount(subset_mask));
  std::vector<double> x(d, 0.0);
  if (s == 1) {
    // Far into the chosen half-space, far out of every other one.
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = ((subset_mask >> k) & 1ull) ? 2.0 : -3.0;
    }
    return x;
  }
  // Chosen so the subset's summed inequality is the only nonnegative one:
  // any proper subset falls short of the bias and any outside coordinate
  // drags the sum negative.
  const double sd = static_cast<double>(s);
  const double hi = 0.5 * (1.0 / sd + 1.0 / (sd - 1.0));
  const double lo = -2.0 / (sd - 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = ((subset_mask >> k) & 1ull) ? hi : lo;
  }
  return x;
}

ThresholdNetwork make_coordinate_or_network(std::size_t n, std::size_t d) {
  if (n < 2) throw std::invalid_argument("coordinate or: need at least two coordinates");
  if (d < n) throw std::invalid_argument("coordinate or: dimension must be at least n");
  std::vector<AffineUnit> hidden(n);
  for (std::size_t k = 0; k < n; ++k) {
    hidden[k].weights.assign(d, 0.0);
    hidden[k].weights[k] = 1.0;
  }
  const std::vector<double> ones(n, 1.0);
  return make_two_layer_threshold(d, hidden, ones, static_cast<double>(n) - 1.0);
}

ThresholdNetwork flatten_pure_disjunction(const ReluNetwork& net) {
  net.validate();
  if (!net.negative_units.empty()) {
    throw std::invalid_argument("flatten_pure_disjunction: network has negative units");
  }
  const std::size_t n1 = net.positive_units.size();
  if (n1 >= 31) throw guard_error("flatten_pure_disjunction: too many units to enumerate");
  const std::size_t count = static_cast<std::size_t>(1) << n1;
  std::vector<AffineUnit> hidden;
  hidden.reserve(count);
  for (std::uint64_t s1 = 0; s1 < count; ++s1) {
    hidden.push_back(subset_inequality_unit(net, SubsetPair{s1, 0}));
  }
  const std::vector<double> ones(count, 1.0);
  return make_two_layer_threshold(net.dim, hidden, ones, static_cast<double>(count) - 1.0);
}

}  // namespace rectex
