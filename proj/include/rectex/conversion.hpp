#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rectex/relu_network.hpp"
#include "rectex/threshold_network.hpp"

namespace rectex {

// Subset pair indexing the inequality units: bit k of positive_mask selects
// positive_units[k], bit k of negative_mask selects negative_units[k].
struct SubsetPair {
  std::uint64_t positive_mask = 0;
  std::uint64_t negative_mask = 0;
};

enum class NormalForm { dnf, cnf };

struct ConversionReport {
  std::size_t n1 = 0;                  // positive unit count
  std::size_t n2 = 0;                  // negative unit count
  std::size_t first_layer_units = 0;   // 2^(n1+n2)
  std::size_t second_layer_units = 0;  // 2^n1 for dnf, 2^n2 for cnf
  NormalForm form = NormalForm::dnf;
};

struct ThresholdConversion {
  ThresholdNetwork network;
  ConversionReport report;
};

inline constexpr std::size_t default_first_layer_cap = 1u << 16;

// The affine unit whose sign answers "is output_bias plus the selected
// positive pre-activations minus the selected negative ones nonnegative".
AffineUnit subset_inequality_unit(const ReluNetwork& net, SubsetPair subsets);

// Exact three-layer threshold equivalents of a rectifier classifier. The
// first layer holds one inequality unit per subset pair; the dnf variant
// groups them by positive subset under AND units and ORs the groups, the cnf
// variant groups by negative subset under OR units and ANDs the groups.
// Throws guard_error when 2^(n1+n2) exceeds first_layer_cap.
ThresholdConversion to_threshold_dnf(const ReluNetwork& net,
                                     std::size_t first_layer_cap = default_first_layer_cap);
ThresholdConversion to_threshold_cnf(const ReluNetwork& net,
                                     std::size_t first_layer_cap = default_first_layer_cap);

// Subset-quantifier classifiers: "some positive subset beats every negative
// subset" and its quantifier-swapped form. Both agree pointwise with
// ReluNetwork::evaluate; they exist as independent characterizations to test
// against. Guarded to unit_count() <= 20.
int classify_exists_forall(const ReluNetwork& net, std::span<const double> x);
int classify_forall_exists(const ReluNetwork& net, std::span<const double> x);

// Two rectifier units whose scaled difference reproduces a sign unit outside
// the band |u.x + b| < margin: above = (u, b + margin), below = (u, b - margin).
struct SurrogatePair {
  AffineUnit above;
  AffineUnit below;
};
SurrogatePair sign_surrogate_pair(const AffineUnit& unit, double margin);

// Replaces every hidden sign unit of a two-layer threshold net with its
// surrogate pair. Exact wherever no hidden unit falls inside its margin band.
ReluNetwork approximate_with_rectifiers(const ThresholdNetwork& net, double margin);

// Folds a disjunction of three sign units, sgn(a), sgn(b), sgn(c) with
// c.weights = p*a.weights + q*b.weights, into two rectifier units. Throws
// not_coplanar_error when no such (p, q) exists and bias_dependent_error when
// the bias also satisfies the dependency.
ReluNetwork compress_sign_triple(const AffineUnit& a, const AffineUnit& b,
                                 const AffineUnit& c);

// OR of the first n coordinate signs, written as a rectifier net with n
// units: sgn(-1 + sum of rect(x_k)). Its decision boundary has 2^n - 1
// distinct hyperplane pieces, one per nonempty subset.
ReluNetwork make_axis_disjunction_network(std::size_t n, std::size_t d);

// A point on the boundary piece of make_axis_disjunction_network(n, d)
// belonging to the given nonempty subset of coordinates (bit k = coordinate
// k). At the point, the subset's inequality is tight and every other
// nonempty subset's is strictly negative.
std::vector<double> axis_disjunction_witness(std::size_t n, std::size_t d,
                                             std::uint64_t subset_mask);

// OR of the first n coordinate signs as a two-layer threshold net. Requires
// n > 1; a rectifier net matching it exactly would need more than n units.
ThresholdNetwork make_coordinate_or_network(std::size_t n, std::size_t d);

// For a net with no negative units the dnf collapses: one inequality unit
// per positive subset under a single OR. Returns that two-layer form.
ThresholdNetwork flatten_pure_disjunction(const ReluNetwork& net);

}  // namespace rectex
