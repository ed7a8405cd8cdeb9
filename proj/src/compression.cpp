#include "rectex/compression.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rectex/errors.hpp"
#include "rectex/parallel.hpp"
#include "rectex/simplex.hpp"

namespace rectex {

namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::size_t log2_exact(std::size_t v) {
  return static_cast<std::size_t>(std::countr_zero(v));
}

std::size_t argmax_one_based(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best + 1;
}

}  // namespace

EncodingMatrix EncodingMatrix::make(std::size_t n) {
  if (n < 1) throw std::invalid_argument("encoding matrix: n must be at least 1");
  if (n > 20) throw guard_error("encoding matrix: n above 20 is not enumerable here");
  return EncodingMatrix{n};
}

Matrix EncodingMatrix::dense() const {
  Matrix out(n, cols());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < cols(); ++c) out(r, c) = bit(r, c);
  }
  return out;
}

Matrix EncodingMatrix::dense_extended() const {
  Matrix out(n + 1, cols());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < cols(); ++c) out(r, c) = bit(r, c);
  }
  for (std::size_t c = 0; c < cols(); ++c) out(n, c) = 1.0;
  return out;
}

VMatrix::VMatrix(Matrix data) : m(std::move(data)) {
  if (m.rows() < 1 || m.cols() < 1) throw std::invalid_argument("unit bank: empty matrix");
  if (!all_finite(m)) throw std::invalid_argument("unit bank: non-finite entries");
}

UMatrix::UMatrix(Matrix data) : m(std::move(data)) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw std::invalid_argument("compressed parameters: empty matrix");
  }
  if (!all_finite(m)) {
    throw std::invalid_argument("compressed parameters: non-finite entries");
  }
  for (std::size_t r = 0; r + 1 < m.rows(); ++r) {
    if (m(r, m.cols() - 1) != 0.0) {
      throw std::invalid_argument(
          "compressed parameters: bias column must be zero outside the last row");
    }
  }
}

Matrix expanded_product(const UMatrix& u) {
  const std::size_t n = u.n();
  if (n > 20) throw guard_error("expand: n above 20 is not enumerable here");
  const std::size_t count = static_cast<std::size_t>(1) << n;
  const std::size_t rows = u.m.rows();
  Matrix out(rows, count);
  for (std::size_t c = 0; c < count; ++c) {
    for (std::size_t r = 0; r < rows; ++r) out(r, c) = u.m(r, n);
    for (std::size_t k = 0; k < n; ++k) {
      if ((c >> (n - 1 - k)) & 1u) {
        for (std::size_t r = 0; r < rows; ++r) out(r, c) += u.m(r, k);
      }
    }
  }
  return out;
}

Expansion expand_units(const UMatrix& u) {
  VMatrix v(expanded_product(u));
  const std::size_t d = v.dim();
  const std::size_t count = v.units();
  std::vector<AffineUnit> hidden(count);
  for (std::size_t c = 0; c < count; ++c) {
    hidden[c].weights.resize(d);
    for (std::size_t j = 0; j < d; ++j) hidden[c].weights[j] = v.m(j, c);
    hidden[c].bias = v.m(d, c);
  }
  const std::vector<double> ones(count, 1.0);
  ThresholdNetwork net =
      make_two_layer_threshold(d, hidden, ones, static_cast<double>(count) - 1.0);
  return Expansion{std::move(v), std::move(net)};
}

ReluNetwork rectifier_network(const UMatrix& u) {
  const std::size_t d = u.dim();
  const std::size_t n = u.n();
  ReluNetwork net;
  net.dim = d;
  net.output_bias = u.output_bias();
  net.positive_units.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    net.positive_units[k].weights.resize(d);
    for (std::size_t j = 0; j < d; ++j) net.positive_units[k].weights[j] = u.m(j, k);
    net.positive_units[k].bias = u.m(d, k);
  }
  net.validate();
  return net;
}

std::variant<UMatrix, NotFactorable> exact_factor(const VMatrix& v, double tol) {
  const std::size_t count = v.units();
  if (!is_power_of_two(count)) {
    throw std::invalid_argument("exact_factor: unit count must be a power of two");
  }
  const std::size_t n = log2_exact(count);
  const std::size_t d = v.dim();

  Matrix u(d + 1, n + 1);
  const double w0 = v.m(d, 0);
  u(d, n) = w0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t c = static_cast<std::size_t>(1) << (n - 1 - k);
    for (std::size_t j = 0; j < d; ++j) u(j, k) = v.m(j, c);
    u(d, k) = v.m(d, c) - w0;
  }

  for (std::size_t c = 0; c < count; ++c) {
    for (std::size_t j = 0; j <= d; ++j) {
      double pred = j == d ? w0 : 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if ((c >> (n - 1 - k)) & 1u) pred += u(j, k);
      }
      if (std::abs(v.m(j, c) - pred) > tol) return NotFactorable{c + 1};
    }
  }
  return UMatrix(std::move(u));
}

ColumnsFactorization min_infnorm_columns(const Matrix& v, const Matrix& pattern) {
  if (v.cols() != pattern.cols()) {
    throw std::invalid_argument("min_infnorm_columns: column count mismatch");
  }
  if (pattern.rows() < 1) throw std::invalid_argument("min_infnorm_columns: empty pattern");
  const std::size_t m = v.cols();
  const std::size_t coords = v.rows();        // d + 1
  const std::size_t n = pattern.rows() - 1;   // unit columns of U
  const std::size_t d = coords - 1;

  // Variable layout: U unit entries (free), then the output bias (free),
  // then one slack per (unit, coordinate), then the objective t.
  const std::size_t nu = n * coords;
  const std::size_t bias_var = nu;
  const std::size_t slack0 = nu + 1;
  const std::size_t t_var = slack0 + m * coords;
  const std::size_t num_vars = t_var + 1;

  LpProblem lp;
  lp.num_vars = num_vars;
  lp.objective.assign(num_vars, 0.0);
  lp.objective[t_var] = 1.0;
  lp.nonneg.assign(num_vars, true);
  for (std::size_t j = 0; j < nu + 1; ++j) lp.nonneg[j] = false;

  auto u_var = [&](std::size_t row, std::size_t k) { return row * n + k; };
  auto s_var = [&](std::size_t i, std::size_t j) { return slack0 + i * coords + j; };

  // |residual| rows: slack >= +-(V_ji - predicted_ji).
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < coords; ++j) {
      for (int side = 0; side < 2; ++side) {
        std::vector<double> row(num_vars, 0.0);
        const double sign = side == 0 ? 1.0 : -1.0;
        row[s_var(i, j)] = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
          row[u_var(j, k)] = sign * pattern(k, i);
        }
        if (j == d) row[bias_var] = sign * pattern(n, i);
        lp.rows.push_back(std::move(row));
        lp.relations.push_back('>');
        lp.rhs.push_back(sign * v(j, i));
      }
    }
  }
  // Per-unit L1 rows: sum of the unit's slacks <= t.
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> row(num_vars, 0.0);
    for (std::size_t j = 0; j < coords; ++j) row[s_var(i, j)] = 1.0;
    row[t_var] = -1.0;
    lp.rows.push_back(std::move(row));
    lp.relations.push_back('<');
    lp.rhs.push_back(0.0);
  }

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) {
    throw std::logic_error("min_infnorm_columns: solver failed on a feasible bounded program");
  }

  ColumnsFactorization out;
  out.u = Matrix(coords, n + 1);
  for (std::size_t j = 0; j < coords; ++j) {
    for (std::size_t k = 0; k < n; ++k) out.u(j, k) = sol.x[u_var(j, k)];
  }
  out.u(d, n) = sol.x[bias_var];
  out.objective = sol.objective;
  out.duality_gap = sol.duality_gap;
  out.dual_infeasibility = sol.dual_infeasibility;
  out.iterations = sol.iterations;
  return out;
}

InfnormFactorization min_infnorm_factor(const VMatrix& v) {
  const std::size_t count = v.units();
  if (!is_power_of_two(count)) {
    throw std::invalid_argument("min_infnorm_factor: unit count must be a power of two");
  }
  const std::size_t n = log2_exact(count);
  if (n > 10) {
    throw solver_guard_error("min_infnorm_factor: more than 2^10 units");
  }
  if (n == 0) {
    // One unit: only the bias column exists and it can match the bias
    // exactly, leaving the weight rows as irreducible error.
    Matrix u(v.m.rows(), 1);
    const std::size_t d = v.dim();
    u(d, 0) = v.m(d, 0);
    double obj = 0.0;
    for (std::size_t j = 0; j < d; ++j) obj += std::abs(v.m(j, 0));
    return InfnormFactorization{UMatrix(std::move(u)), obj, 0.0, 0.0, 0};
  }
  const EncodingMatrix t = EncodingMatrix::make(n);
  ColumnsFactorization cols = min_infnorm_columns(v.m, t.dense_extended());
  return InfnormFactorization{UMatrix(std::move(cols.u)), cols.objective,
                              cols.duality_gap, cols.dual_infeasibility, cols.iterations};
}

std::vector<double> unit_scores(const Matrix& units, std::span<const double> x_aug) {
  if (x_aug.size() != units.rows()) {
    throw std::invalid_argument("unit_scores: input size mismatch");
  }
  std::vector<double> scores(units.cols(), 0.0);
  for (std::size_t c = 0; c < units.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < units.rows(); ++r) s += units(r, c) * x_aug[r];
    scores[c] = s;
  }
  return scores;
}

std::optional<std::size_t> classify_by_max_unit(const Matrix& units,
                                                std::span<const double> x_aug) {
  if (x_aug.empty() || x_aug.back() != 1.0) {
    throw std::invalid_argument("classify_by_max_unit: input must end with an augmentation 1");
  }
  const std::vector<double> scores = unit_scores(units, x_aug);
  bool any_claim = false;
  for (double s : scores) {
    if (s >= 0.0) {
      any_claim = true;
      break;
    }
  }
  if (!any_claim) return std::nullopt;
  return argmax_one_based(scores);
}

MarginAuditResult margin_audit(const VMatrix& v, const UMatrix& u,
                               const std::vector<std::vector<double>>& examples_aug,
                               MarginAuditOptions options) {
  if (u.dim() != v.dim()) throw std::invalid_argument("margin_audit: dimension mismatch");
  const Matrix product = expanded_product(u);
  if (product.cols() != v.units()) {
    throw std::invalid_argument("margin_audit: unit count mismatch");
  }

  MarginAuditResult out;
  out.residual_norm = induced_inf_norm(transpose(subtract(v.m, product)));
  out.records.resize(examples_aug.size());

  parallel_for(examples_aug.size(), [&](std::size_t idx) {
    const std::vector<double>& x = examples_aug[idx];
    if (x.size() != v.m.rows() || x.back() != 1.0) {
      throw std::invalid_argument("margin_audit: example must be augmented with a trailing 1");
    }
    MarginRecord rec;
    const std::size_t norm_span = options.include_bias_slot ? x.size() : x.size() - 1;
    double xn = 0.0;
    for (std::size_t j = 0; j < norm_span; ++j) xn = std::max(xn, std::abs(x[j]));
    if (xn == 0.0) {
      throw std::invalid_argument("margin_audit: example with zero norm");
    }
    rec.x_inf_norm = xn;

    const std::vector<double> sv = unit_scores(v.m, x);
    const std::vector<double> su = unit_scores(product, x);
    rec.argmax_v = argmax_one_based(sv);
    rec.argmax_ut = argmax_one_based(su);
    if (sv.size() == 1) {
      rec.gamma = std::numeric_limits<double>::infinity();
    } else {
      double top = -std::numeric_limits<double>::infinity();
      double second = top;
      for (double s : sv) {
        if (s > top) {
          second = top;
          top = s;
        } else if (s > second) {
          second = s;
        }
      }
      rec.gamma = top - second;
    }
    rec.bound = rec.gamma / (2.0 * xn);
    rec.passes = out.residual_norm <= rec.bound;
    out.records[idx] = rec;
  });

  for (const MarginRecord& rec : out.records) {
    if (rec.passes && rec.argmax_v != rec.argmax_ut) ++out.implication_violations;
  }
  return out;
}

}  // namespace rectex
