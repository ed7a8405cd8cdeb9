#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "rectex/matrix.hpp"
#include "rectex/relu_network.hpp"
#include "rectex/threshold_network.hpp"

namespace rectex {

// Binary subset-encoding matrix with 2^n columns. Column j holds the n-bit
// binary expansion of j, most significant bit in row 0, so column 0 is all
// zeros, column 2^n - 1 all ones, and the columns are pairwise distinct.
// Entries are generated on demand; dense copies exist for callers that want
// to multiply.
struct EncodingMatrix {
  std::size_t n = 0;

  static EncodingMatrix make(std::size_t n);  // 1 <= n <= 20

  std::size_t cols() const { return static_cast<std::size_t>(1) << n; }
  int bit(std::size_t row, std::size_t col) const {
    return static_cast<int>((col >> (n - 1 - row)) & 1u);
  }

  Matrix dense() const;           // n x 2^n
  Matrix dense_extended() const;  // with an all-ones row appended
};

// Bank of 2^n sign units, stored column-wise: column k holds unit k's
// weights with its bias in the last row.
struct VMatrix {
  Matrix m;  // (d+1) x count

  explicit VMatrix(Matrix data);
  std::size_t dim() const { return m.rows() - 1; }
  std::size_t units() const { return m.cols(); }
};

// Compressed parameters: n rectifier unit columns (weights over bias) and a
// final column that is zero except for the output bias in the last row.
struct UMatrix {
  Matrix m;  // (d+1) x (n+1)

  explicit UMatrix(Matrix data);
  std::size_t dim() const { return m.rows() - 1; }
  std::size_t n() const { return m.cols() - 1; }
  double output_bias() const { return m(m.rows() - 1, m.cols() - 1); }
};

// Column c of the product of U with the extended encoding matrix: the sum of
// U's unit columns selected by c's bits plus the bias column.
Matrix expanded_product(const UMatrix& u);

struct Expansion {
  VMatrix v;
  ThresholdNetwork or_network;  // sgn(2^n - 1 + sum of unit signs)
};

// Expands compressed parameters into the full bank of 2^n sign units and the
// two-layer disjunction over them. The disjunction classifies exactly like
// rectifier_network(u): some unit sign is nonnegative iff the best subset
// sum of rectifier pre-activations clears the output bias.
Expansion expand_units(const UMatrix& u);

// The rectifier classifier carried by compressed parameters.
ReluNetwork rectifier_network(const UMatrix& u);

struct NotFactorable {
  std::size_t column = 0;  // first violating column, 1-based
};

// Recovers U from V when V is exactly a subset-sum bank: reads the bias
// column from column 1 and the unit columns from the singleton-bit columns,
// then verifies every column to the tolerance.
std::variant<UMatrix, NotFactorable> exact_factor(const VMatrix& v, double tol = 1e-9);

struct ColumnsFactorization {
  Matrix u;  // (d+1) x (n+1), zero weight block in the last column
  double objective = 0.0;
  double duality_gap = 0.0;
  double dual_infeasibility = 0.0;
  std::size_t iterations = 0;
};

struct InfnormFactorization {
  UMatrix u;
  double objective = 0.0;
  double duality_gap = 0.0;
  double dual_infeasibility = 0.0;
  std::size_t iterations = 0;
};

// Minimizes the worst unit's L1 parameter error, max over columns i of
// L1(v_i - U t_i), over U with the zero weight block enforced. pattern holds
// one column per unit: rows 0..n-1 multiply the unit columns of U, the last
// row multiplies the bias column. Exact linear program, solved to optimality
// with a duality certificate.
ColumnsFactorization min_infnorm_columns(const Matrix& v, const Matrix& pattern);

// min_infnorm_columns against the full extended encoding matrix.
// Throws solver_guard_error when v has more than 2^10 columns.
InfnormFactorization min_infnorm_factor(const VMatrix& v);

// Scores of every unit column at an augmented point (trailing entry 1).
std::vector<double> unit_scores(const Matrix& units, std::span<const double> x_aug);

// Nearest-unit decision: nullopt when every score is negative (no unit
// claims the point), otherwise the 1-based index of the highest score,
// lowest index on ties. A score of exactly zero counts as claiming.
std::optional<std::size_t> classify_by_max_unit(const Matrix& units,
                                                std::span<const double> x_aug);

struct MarginAuditOptions {
  // The bound uses the infinity norm of the augmented input. Excluding the
  // trailing 1 tightens the norm for sensitivity studies; with it excluded a
  // zero input has no norm and is rejected.
  bool include_bias_slot = true;
};

struct MarginRecord {
  double gamma = 0.0;       // top score minus second-top under V; +inf for one unit
  double x_inf_norm = 0.0;
  double bound = 0.0;       // gamma / (2 * x_inf_norm)
  bool passes = false;      // residual_norm <= bound
  std::size_t argmax_v = 0;   // 1-based
  std::size_t argmax_ut = 0;  // 1-based
};

struct MarginAuditResult {
  double residual_norm = 0.0;  // max over units of L1 parameter error
  std::vector<MarginRecord> records;
  std::size_t implication_violations = 0;  // passes with differing argmax
};

// Checks the guarantee "parameter error within the margin bound implies the
// factored bank picks the same unit" on every example. Inputs come augmented
// with a trailing 1.
MarginAuditResult margin_audit(const VMatrix& v, const UMatrix& u,
                               const std::vector<std::vector<double>>& examples_aug,
                               MarginAuditOptions options = {});

}  // namespace rectex
