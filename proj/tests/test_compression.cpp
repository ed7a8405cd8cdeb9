#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "rectex/compression.hpp"
#include "rectex/errors.hpp"
#include "rectex/sgn.hpp"
#include "test_support.hpp"

using namespace rectex;
using testsupport::kBoundaryTieGuard;
using testsupport::project_to_boundary;
using testsupport::random_point;
using testsupport::reference_decision_value;

namespace {

// Random compressed parameters with the structural zero column in place.
UMatrix random_umatrix(SplitRng& rng, std::size_t n, std::size_t d) {
  Matrix m(d + 1, n + 1);
  for (std::size_t j = 0; j <= d; ++j) {
    for (std::size_t k = 0; k < n; ++k) m(j, k) = rng.normal();
  }
  m(d, n) = rng.normal();
  return UMatrix(std::move(m));
}

// Max over unit columns of the column's L1 norm, written independently of
// the transpose-then-row-norm path used by the library.
double worst_column_l1(const Matrix& a) {
  double worst = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    double l1 = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) l1 += std::abs(a(r, c));
    worst = std::max(worst, l1);
  }
  return worst;
}

// Gaussian elimination with partial pivoting on a 6x6 system; false when the
// chosen constraint set is singular.
bool solve6(std::array<std::array<double, 6>, 6> a, std::array<double, 6> b,
            std::array<double, 6>& x) {
  for (std::size_t col = 0; col < 6; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 6; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-9) return false;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = 0; r < 6; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < 6; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = 0; i < 6; ++i) x[i] = b[i] / a[i][i];
  return true;
}

// Exact minimum of the worst-unit L1 error for two units in one dimension,
// found by enumerating every vertex of the constraint polyhedron in the
// parameter space (a1, a2, b1, b2, w0, t). Independent of the simplex code.
double vertex_oracle_n2_d1(const Matrix& v) {
  REQUIRE(v.rows() == 2);
  REQUIRE(v.cols() == 4);
  const int bit0[4] = {0, 0, 1, 1};  // high bit of the column index
  const int bit1[4] = {0, 1, 0, 1};

  std::vector<std::array<double, 6>> rows;
  std::vector<double> rhs;
  for (int i = 0; i < 4; ++i) {
    for (int s0 = -1; s0 <= 1; s0 += 2) {
      for (int s1 = -1; s1 <= 1; s1 += 2) {
        const double p0 = bit0[i];
        const double p1 = bit1[i];
        rows.push_back({-s0 * p0, -s0 * p1, -s1 * p0, -s1 * p1,
                        static_cast<double>(-s1), -1.0});
        rhs.push_back(-s0 * v(0, i) - s1 * v(1, i));
      }
    }
  }
  rows.push_back({0.0, 0.0, 0.0, 0.0, 0.0, -1.0});  // t >= 0
  rhs.push_back(0.0);

  const std::size_t total = rows.size();
  double best = std::numeric_limits<double>::infinity();
  std::array<std::size_t, 6> pick{};
  // All 6-subsets of the 17 constraints.
  for (pick[0] = 0; pick[0] < total; ++pick[0])
    for (pick[1] = pick[0] + 1; pick[1] < total; ++pick[1])
      for (pick[2] = pick[1] + 1; pick[2] < total; ++pick[2])
        for (pick[3] = pick[2] + 1; pick[3] < total; ++pick[3])
          for (pick[4] = pick[3] + 1; pick[4] < total; ++pick[4])
            for (pick[5] = pick[4] + 1; pick[5] < total; ++pick[5]) {
              std::array<std::array<double, 6>, 6> a;
              std::array<double, 6> b;
              for (std::size_t r = 0; r < 6; ++r) {
                a[r] = rows[pick[r]];
                b[r] = rhs[pick[r]];
              }
              std::array<double, 6> x;
              if (!solve6(a, b, x)) continue;
              bool feasible = true;
              for (std::size_t r = 0; r < total && feasible; ++r) {
                double lhs = 0.0;
                for (std::size_t c = 0; c < 6; ++c) lhs += rows[r][c] * x[c];
                feasible = lhs <= rhs[r] + 1e-7;
              }
              if (feasible) best = std::min(best, x[5]);
            }
  REQUIRE(std::isfinite(best));
  return best;
}

}  // namespace

TEST_CASE("encoding matrix columns spell out the binary expansions") {
  const EncodingMatrix t3 = EncodingMatrix::make(3);
  const Matrix d = t3.dense();
  const double want[3][8] = {{0, 0, 0, 0, 1, 1, 1, 1},
                             {0, 0, 1, 1, 0, 0, 1, 1},
                             {0, 1, 0, 1, 0, 1, 0, 1}};
  REQUIRE(d.rows() == 3);
  REQUIRE(d.cols() == 8);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 8; ++c) CHECK(d(r, c) == want[r][c]);
  }

  const Matrix d1 = EncodingMatrix::make(1).dense();
  REQUIRE(d1.rows() == 1);
  CHECK(d1(0, 0) == 0.0);
  CHECK(d1(0, 1) == 1.0);
}

TEST_CASE("encoding matrix invariants hold for every enumerable size") {
  for (std::size_t n = 1; n <= 10; ++n) {
    const EncodingMatrix t = EncodingMatrix::make(n);
    for (std::size_t c = 0; c < t.cols(); ++c) {
      std::size_t decoded = 0;
      for (std::size_t r = 0; r < n; ++r) {
        decoded = (decoded << 1) | static_cast<std::size_t>(t.bit(r, c));
      }
      CHECK(decoded == c);  // distinct columns, MSB in row 0
    }
    const Matrix ext = t.dense_extended();
    REQUIRE(ext.rows() == n + 1);
    for (std::size_t c = 0; c < t.cols(); ++c) CHECK(ext(n, c) == 1.0);
  }
  CHECK_THROWS_AS(EncodingMatrix::make(0), std::invalid_argument);
  CHECK_THROWS_AS(EncodingMatrix::make(21), guard_error);
}

TEST_CASE("parameter matrices validate their shapes") {
  CHECK_THROWS_AS(VMatrix(Matrix(0, 0)), std::invalid_argument);
  Matrix bad(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(VMatrix{bad}, std::invalid_argument);

  Matrix u(3, 3);
  u(0, 2) = 0.5;  // weight entry leaking into the bias column
  CHECK_THROWS_AS(UMatrix{u}, std::invalid_argument);
  u(0, 2) = 0.0;
  u(2, 2) = -1.0;
  CHECK_NOTHROW(UMatrix{u});
}

TEST_CASE("expanded product sums the unit columns a subset at a time") {
  SplitRng rng(10, 4);
  const UMatrix u = random_umatrix(rng, 3, 2);
  const Matrix prod = expanded_product(u);
  REQUIRE(prod.cols() == 8);

  // Column 0 carries only the bias column; singleton columns add one unit.
  for (std::size_t j = 0; j <= 2; ++j) {
    CHECK(prod(j, 0) == u.m(j, 3));
    CHECK(prod(j, 4) == doctest::Approx(u.m(j, 0) + u.m(j, 3)));  // unit 0 at bit 100
    CHECK(prod(j, 1) == doctest::Approx(u.m(j, 2) + u.m(j, 3)));  // unit 2 at bit 001
  }
  // Full mask sums everything.
  for (std::size_t j = 0; j <= 2; ++j) {
    CHECK(prod(j, 7) ==
          doctest::Approx(u.m(j, 0) + u.m(j, 1) + u.m(j, 2) + u.m(j, 3)));
  }

  // A second opinion through the dense encoding matrix product.
  const Matrix via_dense = multiply(u.m, EncodingMatrix::make(3).dense_extended());
  for (std::size_t j = 0; j <= 2; ++j) {
    for (std::size_t c = 0; c < 8; ++c) {
      CHECK(prod(j, c) == doctest::Approx(via_dense(j, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("expansion disjunction classifies exactly like the rectifier net") {
  SplitRng rng(2211, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(4);
    const std::size_t d = 1 + rng.below(4);
    const UMatrix u = random_umatrix(rng, n, d);
    const Expansion ex = expand_units(u);
    const ReluNetwork rect = rectifier_network(u);
    REQUIRE(ex.or_network.layers[0].fan_out() == (1u << n));

    for (int pt = 0; pt < 200; ++pt) {
      std::vector<double> x = random_point(rng, d);
      if (pt % 2 == 1) {
        // Land on a random expanded unit's surface to stress the switches
        // between the winning subsets.
        const std::size_t c = rng.below(1ull << n);
        AffineUnit unit;
        unit.weights.resize(d);
        for (std::size_t j = 0; j < d; ++j) unit.weights[j] = ex.v.m(j, c);
        unit.bias = ex.v.m(d, c);
        project_to_boundary(unit, x);
      }
      // The rectifier value equals the best expanded unit's value, so it is
      // the decision margin for both networks.
      if (std::abs(reference_decision_value(rect, x)) < kBoundaryTieGuard) continue;
      CHECK(ex.or_network.evaluate(x) == rect.evaluate(x));
    }
  }
}

TEST_CASE("expansion disjunction agrees with the rectifier on an exact tie") {
  // Integer parameters and a dyadic input: the best expanded unit evaluates
  // to 0.0 exactly, both readings must call it positive.
  Matrix p(2, 3);
  p(0, 0) = 1.0;
  p(1, 0) = -2.0;
  p(0, 1) = -1.0;
  p(1, 1) = -2.0;
  p(1, 2) = -0.25;
  const UMatrix u{p};
  const Expansion ex = expand_units(u);
  const ReluNetwork rect = rectifier_network(u);

  const std::vector<double> tie = {2.25};  // first unit: 2.25 - 2.25 == 0
  CHECK(ex.or_network.evaluate(tie) == 1);
  CHECK(rect.evaluate(tie) == 1);
  const std::vector<double> below = {0.0};  // every expanded unit negative
  CHECK(ex.or_network.evaluate(below) == -1);
  CHECK(rect.evaluate(below) == -1);
}

TEST_CASE("factoring a genuine subset-sum bank recovers its parameters") {
  SplitRng rng(41, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(4);
    const std::size_t d = 1 + rng.below(5);
    const UMatrix u = random_umatrix(rng, n, d);
    const VMatrix v(expanded_product(u));

    const auto result = exact_factor(v);
    REQUIRE(std::holds_alternative<UMatrix>(result));
    const UMatrix& back = std::get<UMatrix>(result);
    REQUIRE(back.m.rows() == u.m.rows());
    REQUIRE(back.m.cols() == u.m.cols());
    for (std::size_t j = 0; j < u.m.rows(); ++j) {
      for (std::size_t k = 0; k < u.m.cols(); ++k) {
        CHECK(std::abs(back.m(j, k) - u.m(j, k)) <= 1e-12);
      }
    }

    const Matrix again = expanded_product(back);
    for (std::size_t j = 0; j < v.m.rows(); ++j) {
      for (std::size_t c = 0; c < v.m.cols(); ++c) {
        CHECK(std::abs(again(j, c) - v.m(j, c)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("factoring reports the first violating column, one-based") {
  SplitRng rng(43, 5);
  const UMatrix u = random_umatrix(rng, 2, 2);

  // The all-zero-mask column predicts zero weights, so a weight perturbation
  // there trips the very first check.
  {
    Matrix m = expanded_product(u);
    m(0, 0) += 0.5;
    const auto result = exact_factor(VMatrix(std::move(m)));
    REQUIRE(std::holds_alternative<NotFactorable>(result));
    CHECK(std::get<NotFactorable>(result).column == 1);
  }
  // Singleton columns are read as the parameters themselves, so a doctored
  // two-bit column is the first place a contradiction can surface.
  {
    Matrix m = expanded_product(u);
    m(1, 3) += 0.5;
    const auto result = exact_factor(VMatrix(std::move(m)));
    REQUIRE(std::holds_alternative<NotFactorable>(result));
    CHECK(std::get<NotFactorable>(result).column == 4);
  }
}

TEST_CASE("random banks are almost never subset-sum structured") {
  SplitRng rng(47, 6);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m(3, 8);
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t c = 0; c < 8; ++c) m(j, c) = rng.normal();
    }
    const auto result = exact_factor(VMatrix(std::move(m)));
    CHECK(std::holds_alternative<NotFactorable>(result));
  }

  CHECK_THROWS_AS(exact_factor(VMatrix(Matrix(2, 3))), std::invalid_argument);
  CHECK_THROWS_AS(min_infnorm_factor(VMatrix(Matrix(2, 5))), std::invalid_argument);
}

TEST_CASE("solver guard refuses banks beyond a thousand units") {
  CHECK_THROWS_AS(min_infnorm_factor(VMatrix(Matrix(2, 2048))), solver_guard_error);
  CHECK_NOTHROW(min_infnorm_factor(VMatrix(Matrix(2, 1))));
}

TEST_CASE("optimized factorization drives factorable banks to zero error") {
  SplitRng rng(53, 9);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + rng.below(2);
    const std::size_t d = 1 + rng.below(2);
    const UMatrix u = random_umatrix(rng, n, d);
    const VMatrix v(expanded_product(u));
    const InfnormFactorization f = min_infnorm_factor(v);
    CHECK(f.objective <= 1e-9);
    CHECK(f.duality_gap <= 1e-7);
    CHECK(f.dual_infeasibility <= 1e-7);
  }
}

TEST_CASE("single-unit banks have a closed-form factorization") {
  Matrix m(3, 1);
  m(0, 0) = 0.75;
  m(1, 0) = -0.5;
  m(2, 0) = 2.0;
  const InfnormFactorization f = min_infnorm_factor(VMatrix(std::move(m)));
  CHECK(f.objective == doctest::Approx(1.25));  // bias matches, weights are stuck
  CHECK(f.u.output_bias() == 2.0);
}

TEST_CASE("bias-only location problem reduces to the midpoint rule") {
  // One parameter, all columns share the constant pattern: the best bias is
  // the midpoint of the values and the error is half the spread.
  const std::vector<double> values = {0.3, -1.2, 2.5, 0.9, 2.1};
  Matrix v(1, values.size());
  Matrix pattern(1, values.size(), 1.0);
  for (std::size_t i = 0; i < values.size(); ++i) v(0, i) = values[i];

  const ColumnsFactorization f = min_infnorm_columns(v, pattern);
  const double lo = *std::min_element(values.begin(), values.end());
  const double hi = *std::max_element(values.begin(), values.end());
  CHECK(f.objective == doctest::Approx((hi - lo) / 2.0));
  CHECK(f.u(0, 0) == doctest::Approx((hi + lo) / 2.0));

  // Brute-force the same one-dimensional location problem on a fine grid.
  double best = std::numeric_limits<double>::infinity();
  for (double b = lo; b <= hi; b += 1e-4) {
    double worst = 0.0;
    for (double val : values) worst = std::max(worst, std::abs(val - b));
    best = std::min(best, worst);
  }
  CHECK(f.objective == doctest::Approx(best).epsilon(1e-3));
}

TEST_CASE("two-unit bias bank: optimum error is a quarter of the obstruction") {
  // With patterns 00, 01, 10, 11 over biases only, the single obstruction to
  // an exact fit is v0 - v1 - v2 + v3; the optimum spreads it evenly.
  Matrix v(1, 4);
  v(0, 0) = 0.2;
  v(0, 1) = -0.7;
  v(0, 2) = 1.4;
  v(0, 3) = 0.9;
  const double delta = v(0, 0) - v(0, 1) - v(0, 2) + v(0, 3);

  const ColumnsFactorization f =
      min_infnorm_columns(v, EncodingMatrix::make(2).dense_extended());
  CHECK(f.objective == doctest::Approx(std::abs(delta) / 4.0));
  CHECK(f.duality_gap <= 1e-7);
}

TEST_CASE("optimizer matches exhaustive vertex enumeration on random banks") {
  SplitRng rng(59, 14);
  for (int trial = 0; trial < 6; ++trial) {
    Matrix m(2, 4);
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t c = 0; c < 4; ++c) m(j, c) = rng.normal();
    }
    const double oracle = vertex_oracle_n2_d1(m);
    const InfnormFactorization f = min_infnorm_factor(VMatrix(m));
    CHECK(f.objective == doctest::Approx(oracle).epsilon(1e-5));
    CHECK(f.duality_gap <= 1e-7);
    CHECK(f.dual_infeasibility <= 1e-7);
  }
}

TEST_CASE("optimizer beats the singleton-reading heuristic when it should") {
  SplitRng rng(61, 1);
  const UMatrix u = random_umatrix(rng, 2, 1);
  Matrix m = expanded_product(u);
  m(0, 3) += 0.1;  // doctor the two-bit column's weight

  // Reading the singleton columns reproduces u exactly and leaves the full
  // 0.1 error on the doctored column.
  const auto exact = exact_factor(VMatrix(m));
  REQUIRE(std::holds_alternative<NotFactorable>(exact));
  CHECK(std::get<NotFactorable>(exact).column == 4);

  // The empty column's weight row has no free parameter, so its residual is
  // pinned and the 0.1 obstruction spreads over the other three columns.
  const InfnormFactorization f = min_infnorm_factor(VMatrix(m));
  CHECK(f.objective == doctest::Approx(0.1 / 3.0));
  CHECK(f.objective < 0.1 - 1e-6);
  CHECK(f.objective == doctest::Approx(vertex_oracle_n2_d1(m)).epsilon(1e-5));
}

TEST_CASE("dropping columns never increases the optimal error") {
  SplitRng rng(67, 3);
  Matrix m(2, 4);
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t c = 0; c < 4; ++c) m(j, c) = rng.normal();
  }
  const Matrix pattern = EncodingMatrix::make(2).dense_extended();
  const double full = min_infnorm_columns(m, pattern).objective;

  for (std::size_t keep = 1; keep < 4; ++keep) {
    Matrix vs(2, keep);
    Matrix ps(3, keep);
    for (std::size_t c = 0; c < keep; ++c) {
      for (std::size_t j = 0; j < 2; ++j) vs(j, c) = m(j, c);
      for (std::size_t j = 0; j < 3; ++j) ps(j, c) = pattern(j, c);
    }
    CHECK(min_infnorm_columns(vs, ps).objective <= full + 1e-9);
  }
}

TEST_CASE("unit scores are plain augmented dot products") {
  Matrix units(2, 3);
  units(0, 0) = 1.0;
  units(1, 0) = -1.0;
  units(0, 1) = 2.0;
  units(1, 1) = 0.5;
  units(0, 2) = -0.5;
  units(1, 2) = 0.0;
  const std::vector<double> x = {2.0, 1.0};
  const std::vector<double> s = unit_scores(units, x);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(4.5));
  CHECK(s[2] == doctest::Approx(-1.0));

  const std::vector<double> wrong = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(unit_scores(units, wrong), std::invalid_argument);
}

TEST_CASE("max-unit decision rejects all-negative scores and breaks ties low") {
  // Scores at x = (1, 1): column sums.
  Matrix units(2, 3);
  units(0, 0) = -0.5;
  units(1, 0) = -0.5;
  units(0, 1) = -1.0;
  units(1, 1) = -1.0;
  units(0, 2) = -1.5;
  units(1, 2) = -1.5;
  const std::vector<double> x = {1.0, 1.0};
  CHECK(!classify_by_max_unit(units, x).has_value());

  units(0, 0) = 0.25;
  units(1, 0) = 0.25;  // score 0.5
  units(0, 1) = 1.0;
  units(1, 1) = 1.0;  // score 2
  units(0, 2) = 1.0;
  units(1, 2) = 1.0;  // score 2, tied
  const auto pick = classify_by_max_unit(units, x);
  REQUIRE(pick.has_value());
  CHECK(*pick == 2);

  units(0, 1) = -1.0;
  units(1, 1) = 1.0;  // score 0: still claims the point
  units(0, 0) = -2.0;
  units(0, 2) = -3.0;
  const auto zero_claim = classify_by_max_unit(units, x);
  REQUIRE(zero_claim.has_value());
  CHECK(*zero_claim == 2);

  const std::vector<double> unaug = {1.0, 0.5};
  CHECK_THROWS_AS(classify_by_max_unit(units, unaug), std::invalid_argument);
}

TEST_CASE("residual norm agrees with a direct per-unit scan") {
  SplitRng rng(71, 7);
  const UMatrix u = random_umatrix(rng, 2, 3);
  Matrix m = expanded_product(u);
  for (std::size_t j = 0; j < m.rows(); ++j) {
    for (std::size_t c = 0; c < m.cols(); ++c) m(j, c) += 0.01 * rng.normal();
  }
  const VMatrix v(m);

  std::vector<std::vector<double>> examples;
  for (int i = 0; i < 10; ++i) {
    std::vector<double> x = random_point(rng, 3);
    x.push_back(1.0);
    examples.push_back(std::move(x));
  }
  const MarginAuditResult audit = margin_audit(v, u, examples);

  const Matrix diff = subtract(v.m, expanded_product(u));
  CHECK(audit.residual_norm == doctest::Approx(worst_column_l1(diff)).epsilon(1e-12));
}

TEST_CASE("audit on an exact factorization passes everywhere") {
  SplitRng rng(73, 11);
  const UMatrix u = random_umatrix(rng, 3, 4);
  const VMatrix v(expanded_product(u));

  std::vector<std::vector<double>> examples;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x = random_point(rng, 4);
    x.push_back(1.0);
    examples.push_back(std::move(x));
  }
  const MarginAuditResult audit = margin_audit(v, u, examples);
  CHECK(audit.residual_norm <= 1e-12);
  CHECK(audit.implication_violations == 0);
  for (const MarginRecord& rec : audit.records) {
    CHECK(rec.passes);
    CHECK(rec.argmax_v == rec.argmax_ut);
    CHECK(rec.gamma >= 0.0);
    CHECK(rec.bound == doctest::Approx(rec.gamma / (2.0 * rec.x_inf_norm)));
  }
}

TEST_CASE("tied top scores give a zero margin but still pass at zero residual") {
  // A zero unit column makes columns 0 and 1 identical, so every point ties.
  Matrix um(2, 2);
  um(1, 1) = 0.5;  // output bias; unit 0 is all zero
  const UMatrix u{std::move(um)};
  const VMatrix v(expanded_product(u));

  std::vector<std::vector<double>> examples = {{2.0, 1.0}, {-3.0, 1.0}};
  const MarginAuditResult audit = margin_audit(v, u, examples);
  for (const MarginRecord& rec : audit.records) {
    CHECK(rec.gamma == 0.0);
    CHECK(rec.bound == 0.0);
    CHECK(rec.passes);  // zero residual sits exactly on the zero bound
    CHECK(rec.argmax_v == 1);
    CHECK(rec.argmax_ut == 1);
  }
  CHECK(audit.implication_violations == 0);
}

TEST_CASE("single-unit banks audit with an infinite margin") {
  Matrix um(2, 1);
  um(1, 0) = -0.25;
  const UMatrix u{std::move(um)};
  const VMatrix v(expanded_product(u));
  std::vector<std::vector<double>> examples = {{0.5, 1.0}};
  const MarginAuditResult audit = margin_audit(v, u, examples);
  REQUIRE(audit.records.size() == 1);
  CHECK(std::isinf(audit.records[0].gamma));
  CHECK(audit.records[0].passes);
}

TEST_CASE("audit input validation catches the usual mistakes") {
  SplitRng rng(79, 2);
  const UMatrix u = random_umatrix(rng, 2, 2);
  const VMatrix v(expanded_product(u));

  std::vector<std::vector<double>> not_aug = {{1.0, 2.0, 0.5}};
  CHECK_THROWS_AS(margin_audit(v, u, not_aug), std::invalid_argument);

  std::vector<std::vector<double>> short_x = {{1.0, 1.0}};
  CHECK_THROWS_AS(margin_audit(v, u, short_x), std::invalid_argument);

  const UMatrix other = random_umatrix(rng, 2, 3);
  std::vector<std::vector<double>> ok = {{1.0, 2.0, 1.0}};
  CHECK_THROWS_AS(margin_audit(v, other, ok), std::invalid_argument);

  // Excluding the augmentation slot leaves the origin without a norm.
  std::vector<std::vector<double>> origin = {{0.0, 0.0, 1.0}};
  MarginAuditOptions opts;
  opts.include_bias_slot = false;
  CHECK_THROWS_AS(margin_audit(v, u, origin, opts), std::invalid_argument);
  CHECK_NOTHROW(margin_audit(v, u, origin));  // the slot itself provides norm 1
}

TEST_CASE("perturbation radius where the audit flips matches the linear model") {
  SplitRng rng(83, 4);
  const std::size_t n = 2;
  const std::size_t d = 3;
  const UMatrix u = random_umatrix(rng, n, d);
  const VMatrix v(expanded_product(u));

  // Fixed perturbation direction on the unit columns only.
  Matrix g(d + 1, n + 1);
  for (std::size_t j = 0; j <= d; ++j) {
    for (std::size_t k = 0; k < n; ++k) g(j, k) = rng.normal();
  }

  std::vector<std::vector<double>> examples;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x = random_point(rng, d);
    x.push_back(1.0);
    examples.push_back(std::move(x));
  }

  const auto audit_at = [&](double delta) {
    Matrix pm = u.m;
    for (std::size_t j = 0; j <= d; ++j) {
      for (std::size_t k = 0; k < n; ++k) pm(j, k) += delta * g(j, k);
    }
    return margin_audit(v, UMatrix(std::move(pm)), examples);
  };
  const auto all_pass = [](const MarginAuditResult& r) {
    for (const MarginRecord& rec : r.records) {
      if (!rec.passes) return false;
    }
    return true;
  };

  // Residual grows linearly in delta, so the flip sits at min-bound over the
  // per-delta growth rate. Both factors computed by hand here.
  const MarginAuditResult base = audit_at(0.0);
  double min_bound = std::numeric_limits<double>::infinity();
  for (const MarginRecord& rec : base.records) min_bound = std::min(min_bound, rec.bound);
  REQUIRE(min_bound > 0.0);

  const Matrix gt = expanded_product(UMatrix(g));  // bias column of g is zero
  const double rate = worst_column_l1(gt);
  REQUIRE(rate > 0.0);
  const double predicted = min_bound / rate;

  CHECK(all_pass(audit_at(predicted * 0.99)));
  CHECK(audit_at(predicted * 0.99).implication_violations == 0);
  CHECK(!all_pass(audit_at(predicted * 1.01)));

  double lo = 0.0;
  double hi = predicted * 4.0;
  REQUIRE(!all_pass(audit_at(hi)));
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (all_pass(audit_at(mid))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  CHECK(hi == doctest::Approx(predicted).epsilon(1e-6));
}
