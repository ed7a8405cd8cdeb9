#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "rectex/general_network.hpp"
#include "rectex/region_count.hpp"
#include "rectex/relu_network.hpp"
#include "rectex/sgn.hpp"
#include "rectex/threshold_network.hpp"
#include "test_support.hpp"

using namespace rectex;
using testsupport::random_point;
using testsupport::random_relu_network;
using testsupport::random_unit;
using testsupport::reference_relu_eval;

TEST_CASE("sign convention: zero is positive, no tolerance band") {
  CHECK(sgn(0.0) == 1);
  CHECK(sgn(-0.0) == 1);
  CHECK(sgn(3.7) == 1);
  CHECK(sgn(-1e-300) == -1);
  CHECK(sgn(1e-300) == 1);
  CHECK_THROWS_AS(sgn(std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(sgn(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("rectifier clamps negatives only") {
  CHECK(rectify(0.0) == 0.0);
  CHECK(rectify(-2.5) == 0.0);
  CHECK(rectify(3.25) == 3.25);
}

TEST_CASE("rectifier net with no units classifies by its bias alone") {
  ReluNetwork net;
  net.dim = 3;
  net.output_bias = 1.0;
  CHECK(net.evaluate(std::vector<double>{0.0, 0.0, 0.0}) == 1);
  net.output_bias = 0.0;
  CHECK(net.evaluate(std::vector<double>{5.0, -1.0, 2.0}) == 1);
  net.output_bias = -0.25;
  CHECK(net.evaluate(std::vector<double>{5.0, -1.0, 2.0}) == -1);
}

TEST_CASE("rectifier evaluation matches an independent transcription") {
  SplitRng rng(2024, 11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.below(5);
    const ReluNetwork net = random_relu_network(rng, 1 + rng.below(4), d);
    for (int pt = 0; pt < 50; ++pt) {
      const std::vector<double> x = random_point(rng, d);
      CHECK(net.evaluate(x) == reference_relu_eval(net, x));
    }
  }
}

TEST_CASE("output weights fold into unit magnitudes exactly") {
  // 2 * rect(x1 + 1) - 3 * rect(x2 + 2) + 5: the magnitude folds into the
  // unit, the sign picks the side, so the subtracted unit is rect(3 x2 + 6).
  std::vector<AffineUnit> hidden(2);
  hidden[0].weights = {1.0, 0.0};
  hidden[0].bias = 1.0;
  hidden[1].weights = {0.0, 1.0};
  hidden[1].bias = 2.0;
  const std::vector<double> out_w = {2.0, -3.0};
  const ReluNetwork net = ReluNetwork::from_weighted_units(2, hidden, out_w, 5.0);

  REQUIRE(net.positive_units.size() == 1);
  REQUIRE(net.negative_units.size() == 1);
  CHECK(net.positive_units[0].weights == std::vector<double>{2.0, 0.0});
  CHECK(net.positive_units[0].bias == 2.0);
  CHECK(net.negative_units[0].weights == std::vector<double>{0.0, 3.0});
  CHECK(net.negative_units[0].bias == 6.0);
  CHECK(net.output_bias == 5.0);
}

TEST_CASE("zero output weights drop their units") {
  std::vector<AffineUnit> hidden(3);
  for (auto& h : hidden) h.weights = {1.0};
  const std::vector<double> out_w = {0.0, 1.0, 0.0};
  const ReluNetwork net = ReluNetwork::from_weighted_units(1, hidden, out_w, 0.0);
  CHECK(net.unit_count() == 1);
}

TEST_CASE("folding preserves the classifier on random networks") {
  SplitRng rng(77, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.below(4);
    const std::size_t h = 1 + rng.below(4);
    std::vector<AffineUnit> hidden;
    std::vector<double> out_w;
    for (std::size_t k = 0; k < h; ++k) {
      hidden.push_back(random_unit(rng, d));
      out_w.push_back(rng.normal());
    }
    const double w0 = rng.normal();
    const ReluNetwork net = ReluNetwork::from_weighted_units(d, hidden, out_w, w0);

    for (int pt = 0; pt < 100; ++pt) {
      const std::vector<double> x = random_point(rng, d);
      double z = w0;
      for (std::size_t k = 0; k < h; ++k) {
        z += out_w[k] * rectify(hidden[k].pre_activation(x));
      }
      CHECK(net.evaluate(x) == sgn(z));
    }
  }
}

TEST_CASE("threshold net: single unit splits the plane") {
  std::vector<AffineUnit> hidden(1);
  hidden[0].weights = {1.0, -1.0};
  hidden[0].bias = 0.5;
  const std::vector<double> w = {1.0};
  const ThresholdNetwork net = make_two_layer_threshold(2, hidden, w, 0.0);

  CHECK(net.evaluate(std::vector<double>{1.0, 0.0}) == 1);
  CHECK(net.evaluate(std::vector<double>{0.0, 1.0}) == -1);
  CHECK(net.evaluate(std::vector<double>{0.0, 0.5}) == 1);  // exactly on the line
}

namespace {
// Drives a gate network over every +-1 input pattern: units pass coordinate
// signs through, so x in {-1,+1}^m reaches the output gate unchanged.
void check_gate_truth_table(std::size_t m, bool and_gate) {
  std::vector<AffineUnit> hidden(m);
  for (std::size_t k = 0; k < m; ++k) {
    hidden[k].weights.assign(m, 0.0);
    hidden[k].weights[k] = 1.0;
  }
  const std::vector<double> ones(m, 1.0);
  const double bias = and_gate ? 1.0 - static_cast<double>(m) : static_cast<double>(m) - 1.0;
  const ThresholdNetwork net = make_two_layer_threshold(m, hidden, ones, bias);

  for (std::size_t pattern = 0; pattern < (1u << m); ++pattern) {
    std::vector<double> x(m);
    bool all = true;
    bool any = false;
    for (std::size_t k = 0; k < m; ++k) {
      const bool on = (pattern >> k) & 1u;
      x[k] = on ? 1.0 : -1.0;
      all = all && on;
      any = any || on;
    }
    const int want = (and_gate ? all : any) ? 1 : -1;
    CHECK(net.evaluate(x) == want);
  }
}
}  // namespace

TEST_CASE("threshold gates implement AND and OR over sign inputs") {
  for (std::size_t m = 1; m <= 4; ++m) {
    check_gate_truth_table(m, true);
    check_gate_truth_table(m, false);
  }
}

TEST_CASE("threshold net first layer reports half-space membership on a grid") {
  std::vector<AffineUnit> hidden(3);
  hidden[0].weights = {1.0, 0.0};
  hidden[0].bias = -0.5;
  hidden[1].weights = {0.0, 1.0};
  hidden[1].bias = 0.25;
  hidden[2].weights = {1.0, 1.0};
  hidden[2].bias = -1.0;
  const std::vector<double> w = {1.0, 1.0, 1.0};
  const ThresholdNetwork net = make_two_layer_threshold(2, hidden, w, 0.5);

  for (double x0 = -2.0; x0 <= 2.0; x0 += 0.25) {
    for (double x1 = -2.0; x1 <= 2.0; x1 += 0.25) {
      const std::vector<double> x = {x0, x1};
      const std::vector<int> signs = net.first_layer_signs(x);
      double gate = 0.5;
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(signs[k] == sgn(hidden[k].pre_activation(x)));
        gate += static_cast<double>(signs[k]);
      }
      CHECK(net.evaluate(x) == sgn(gate));
    }
  }
}

TEST_CASE("threshold net shape validation rejects bad layer stacks") {
  ThresholdNetwork net;
  net.dim = 2;
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);  // no layers

  LinearLayer l1{Matrix(3, 2), std::vector<double>(3, 0.0)};
  LinearLayer l2{Matrix(1, 4), std::vector<double>(1, 0.0)};  // fan-in mismatch
  net.layers = {l1, l2};
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);

  LinearLayer l2ok{Matrix(2, 3), std::vector<double>(2, 0.0)};  // output not scalar
  net.layers = {l1, l2ok};
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
}

TEST_CASE("general net with rectifier hiddens matches the two-layer rectifier form") {
  SplitRng rng(555, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + rng.below(4);
    const std::size_t h = 1 + rng.below(4);
    std::vector<AffineUnit> hidden;
    std::vector<double> out_w;
    for (std::size_t k = 0; k < h; ++k) {
      hidden.push_back(random_unit(rng, d));
      out_w.push_back(rng.normal());
    }
    const double w0 = rng.normal();

    GeneralNetwork gen;
    gen.dim = d;
    ActivatedLayer first;
    first.linear.weights = Matrix(h, d);
    first.linear.biases.resize(h);
    for (std::size_t k = 0; k < h; ++k) {
      for (std::size_t j = 0; j < d; ++j) first.linear.weights(k, j) = hidden[k].weights[j];
      first.linear.biases[k] = hidden[k].bias;
    }
    first.activation = Activation::relu;
    ActivatedLayer out;
    out.linear.weights = Matrix(1, h);
    for (std::size_t k = 0; k < h; ++k) out.linear.weights(0, k) = out_w[k];
    out.linear.biases = {w0};
    out.activation = Activation::sign;
    gen.layers = {first, out};
    gen.validate();

    const ReluNetwork folded = ReluNetwork::from_weighted_units(d, hidden, out_w, w0);
    for (int pt = 0; pt < 50; ++pt) {
      const std::vector<double> x = random_point(rng, d);
      CHECK(gen.evaluate(x) == folded.evaluate(x));
    }
  }
}

TEST_CASE("general net validation enforces the sign output and positive squash scale") {
  GeneralNetwork net;
  net.dim = 1;
  ActivatedLayer only;
  only.linear.weights = Matrix(1, 1, 1.0);
  only.linear.biases = {0.0};
  only.activation = Activation::relu;  // output must be sign
  net.layers = {only};
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);

  only.activation = Activation::sign;
  net.layers = {only};
  CHECK_NOTHROW(net.validate());

  ActivatedLayer squash;
  squash.linear.weights = Matrix(1, 1, 1.0);
  squash.linear.biases = {0.0};
  squash.activation = Activation::compressed_tanh;
  squash.ctanh_scale = 0.0;
  net.layers = {squash, only};
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
}

TEST_CASE("squashed tanh and its derivative agree with the closed forms") {
  CHECK(compressed_tanh(0.0, 10000.0) == 0.0);
  CHECK(compressed_tanh(1.0, 10000.0) == doctest::Approx(1.0));
  CHECK(compressed_tanh(-1.0, 10000.0) == doctest::Approx(-1.0));
  CHECK(compressed_tanh(0.5, 2.0) == doctest::Approx(std::tanh(1.0)));
  CHECK(compressed_tanh_grad(0.0, 10000.0) == 10000.0);
  const double t = std::tanh(2.0 * 0.3);
  CHECK(compressed_tanh_grad(0.3, 2.0) == doctest::Approx(2.0 * (1.0 - t * t)));
}

namespace {
// Textbook recursion for generic arrangements: cutting with one more
// hyperplane adds the regions of the induced (n-1, d-1) arrangement.
std::uint64_t region_count_recursive(std::uint64_t n, std::uint64_t d,
                                     std::map<std::pair<std::uint64_t, std::uint64_t>,
                                              std::uint64_t>& memo) {
  if (n == 0) return 1;
  if (d == 0) return 1;
  const auto key = std::make_pair(n, d);
  const auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  const std::uint64_t value =
      region_count_recursive(n - 1, d, memo) + region_count_recursive(n - 1, d - 1, memo);
  memo[key] = value;
  return value;
}
}  // namespace

TEST_CASE("region counts: pinned values and the cut recursion") {
  CHECK(region_count(3, 2) == 7);
  CHECK(region_count(4, 2) == 11);
  CHECK(region_count(0, 1) == 1);
  CHECK(region_count(0, 7) == 1);
  CHECK(region_count(1, 1) == 2);

  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> memo;
  for (std::uint64_t n = 0; n <= 12; ++n) {
    for (std::uint64_t d = 1; d <= 12; ++d) {
      CHECK(region_count(n, d) == region_count_recursive(n, d, memo));
    }
  }
}

TEST_CASE("region count saturates at 2^n once the dimension catches up") {
  for (std::uint64_t n = 0; n <= 20; ++n) {
    const std::uint64_t full = 1ull << n;
    CHECK(region_count(n, n == 0 ? 1 : n) == full);
    CHECK(region_count(n, n + 3) == full);
    CHECK(region_count(n, 64) == full);
  }
}

TEST_CASE("region count rejects bad dimensions and reports overflow") {
  CHECK_THROWS_AS(region_count(3, 0), std::invalid_argument);
  CHECK_THROWS_AS(region_count(68, 34), std::overflow_error);
  CHECK_THROWS_AS(region_count(500, 250), std::overflow_error);
  CHECK(region_count(63, 1) == 64);  // large n is fine in low dimension
  CHECK(region_count(1000000, 2) == 1ull + 1000000ull + 499999500000ull);
}

TEST_CASE("split rng: streams are deterministic and distinct") {
  SplitRng a(42, 7);
  SplitRng b(42, 7);
  SplitRng c(42, 8);
  bool all_same = true;
  bool any_diff_stream = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t va = a.next_u64();
    all_same = all_same && (va == b.next_u64());
    any_diff_stream = any_diff_stream || (va != c.next_u64());
  }
  CHECK(all_same);
  CHECK(any_diff_stream);
}

TEST_CASE("split rng: normal draws look standard normal") {
  SplitRng rng(9001, 1);
  double sum = 0.0;
  double sum_sq = 0.0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double v = rng.normal();
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}
