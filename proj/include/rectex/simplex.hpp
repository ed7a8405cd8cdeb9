#pragma once

#include <cstddef>
#include <vector>

namespace rectex {

// Minimal dense LP solver: minimize c.x subject to dense rows with <=, =, >=
// relations and per-variable nonnegativity flags. Two-phase full-tableau
// simplex with Bland's rule, so it cannot cycle; intended for the small
// factorization programs in this library, not for large instances.
struct LpProblem {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<char> relations;  // '<', '=', '>'
  std::vector<double> rhs;
  std::vector<bool> nonneg;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  std::vector<double> x;
  double objective = 0.0;
  // Certificate in the standardized (equality, nonnegative) form: dual
  // objective at the basis duals, |primal - dual| gap, and the largest
  // violation of dual feasibility (A^T y <= c), both checked against the
  // unpivoted data.
  double dual_objective = 0.0;
  double duality_gap = 0.0;
  double dual_infeasibility = 0.0;
  std::size_t iterations = 0;
};

LpSolution solve_lp(const LpProblem& problem);

}  // namespace rectex
