#include "rectex/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rectex {

namespace {

constexpr double pivot_tol = 1e-9;
constexpr double cost_tol = 1e-9;
constexpr double feas_tol = 1e-7;
constexpr std::size_t iteration_cap = 200000;

struct Standardized {
  // min c.x, A x = b, x >= 0. Column layout: standardized variables first,
  // then one artificial per row.
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<double> c;
  std::size_t num_std = 0;
  // Original variable j maps to column plus[j], minus offset for free vars.
  std::vector<std::size_t> plus;
  std::vector<std::size_t> minus;  // npos when the variable is nonnegative
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

Standardized standardize(const LpProblem& p) {
  if (p.objective.size() != p.num_vars || p.nonneg.size() != p.num_vars) {
    throw std::invalid_argument("lp: objective/bounds size mismatch");
  }
  if (p.rows.size() != p.rhs.size() || p.rows.size() != p.relations.size()) {
    throw std::invalid_argument("lp: row count mismatch");
  }

  Standardized s;
  s.plus.resize(p.num_vars);
  s.minus.assign(p.num_vars, Standardized::npos);
  std::size_t col = 0;
  for (std::size_t j = 0; j < p.num_vars; ++j) {
    s.plus[j] = col++;
    if (!p.nonneg[j]) s.minus[j] = col++;
  }
  std::size_t slack_cols = 0;
  for (char rel : p.relations) {
    if (rel == '<' || rel == '>') {
      ++slack_cols;
    } else if (rel != '=') {
      throw std::invalid_argument("lp: unknown relation");
    }
  }
  s.num_std = col + slack_cols;

  const std::size_t m = p.rows.size();
  s.a.assign(m, std::vector<double>(s.num_std, 0.0));
  s.b.resize(m);
  s.c.assign(s.num_std, 0.0);
  for (std::size_t j = 0; j < p.num_vars; ++j) {
    s.c[s.plus[j]] = p.objective[j];
    if (s.minus[j] != Standardized::npos) s.c[s.minus[j]] = -p.objective[j];
  }

  std::size_t slack_at = col;
  for (std::size_t i = 0; i < m; ++i) {
    if (p.rows[i].size() != p.num_vars) {
      throw std::invalid_argument("lp: row width mismatch");
    }
    for (std::size_t j = 0; j < p.num_vars; ++j) {
      const double v = p.rows[i][j];
      s.a[i][s.plus[j]] = v;
      if (s.minus[j] != Standardized::npos) s.a[i][s.minus[j]] = -v;
    }
    if (p.relations[i] == '<') {
      s.a[i][slack_at++] = 1.0;
    } else if (p.relations[i] == '>') {
      s.a[i][slack_at++] = -1.0;
    }
    s.b[i] = p.rhs[i];
    if (s.b[i] < 0.0) {
      for (double& v : s.a[i]) v = -v;
      s.b[i] = -s.b[i];
    }
  }
  return s;
}

class Tableau {
 public:
  Tableau(const Standardized& s)
      : m_(s.b.size()), num_std_(s.num_std), cols_(s.num_std + s.b.size()) {
    rows_.assign(m_, std::vector<double>(cols_ + 1, 0.0));
    basis_.resize(m_);
    art_col_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < num_std_; ++j) rows_[i][j] = s.a[i][j];
      const std::size_t art = num_std_ + i;
      rows_[i][art] = 1.0;
      rows_[i][cols_] = s.b[i];
      basis_[i] = art;
      art_col_[i] = art;
    }
  }

  // Runs simplex with the given costs (size cols_). Returns false when the
  // iteration cap is hit; sets unbounded_ when a ray is found.
  bool run(const std::vector<double>& cost, bool allow_artificials) {
    compute_objective_row(cost);
    while (true) {
      if (iterations_ >= iteration_cap) return false;
      // Bland: smallest eligible column index enters.
      std::size_t enter = cols_;
      const std::size_t scan = allow_artificials ? cols_ : num_std_;
      for (std::size_t j = 0; j < scan; ++j) {
        if (obj_[j] < -cost_tol) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return true;

      std::size_t leave = m_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = rows_[i][enter];
        if (a > pivot_tol) {
          const double ratio = rows_[i][cols_] / a;
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && (leave == m_ || basis_[i] < basis_[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave == m_) {
        unbounded_ = true;
        return true;
      }
      pivot(leave, enter);
      ++iterations_;
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const double p = rows_[r][c];
    for (double& v : rows_[r]) v /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      eliminate(rows_[i], rows_[r], c);
    }
    eliminate(obj_, rows_[r], c);
    basis_[r] = c;
  }

  // Pivots artificial variables out of the basis; rows that cannot be
  // pivoted are redundant and get dropped.
  void remove_basic_artificials() {
    for (std::size_t i = 0; i < m_;) {
      if (basis_[i] < num_std_) {
        ++i;
        continue;
      }
      std::size_t c = num_std_;
      for (std::size_t j = 0; j < num_std_; ++j) {
        if (std::abs(rows_[i][j]) > feas_tol) {
          c = j;
          break;
        }
      }
      if (c < num_std_) {
        pivot(i, c);
        ++i;
      } else {
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
        art_col_.erase(art_col_.begin() + static_cast<std::ptrdiff_t>(i));
        --m_;
      }
    }
  }

  double objective_value(const std::vector<double>& cost) const {
    double v = 0.0;
    for (std::size_t i = 0; i < m_; ++i) v += cost[basis_[i]] * rows_[i][cols_];
    return v;
  }

  std::vector<double> basic_solution() const {
    std::vector<double> x(num_std_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < num_std_) x[basis_[i]] = rows_[i][cols_];
    }
    return x;
  }

  // y = c_B * B^{-1}. The artificial column born as e_i stores B^{-1} e_i,
  // so duals fall out of the tableau directly. art_origin[i] gives the row
  // the surviving artificial column belonged to at construction time.
  std::vector<double> duals(const std::vector<double>& cost,
                            std::vector<std::size_t>& art_origin) const {
    std::vector<double> y(m_, 0.0);
    art_origin.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      art_origin[i] = art_col_[i] - num_std_;
      double v = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        v += cost[basis_[r]] * rows_[r][art_col_[i]];
      }
      y[i] = v;
    }
    return y;
  }

  std::size_t rows_left() const { return m_; }
  std::size_t num_std() const { return num_std_; }
  std::size_t total_cols() const { return cols_; }
  bool unbounded() const { return unbounded_; }
  std::size_t iterations() const { return iterations_; }

 private:
  static void eliminate(std::vector<double>& target, const std::vector<double>& pivot_row,
                        std::size_t c) {
    const double f = target[c];
    if (f == 0.0) return;
    for (std::size_t j = 0; j < target.size(); ++j) target[j] -= f * pivot_row[j];
  }

  void compute_objective_row(const std::vector<double>& cost) {
    obj_.assign(cols_ + 1, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) obj_[j] = cost[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) obj_[j] -= cb * rows_[i][j];
    }
  }

  std::size_t m_;
  std::size_t num_std_;
  std::size_t cols_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> obj_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> art_col_;
  bool unbounded_ = false;
  std::size_t iterations_ = 0;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  const Standardized s = standardize(problem);
  LpSolution out;

  if (s.b.empty()) {
    // No constraints: zero is optimal unless some cost direction is free to
    // improve, which no caller of this solver constructs.
    out.status = LpStatus::optimal;
    out.x.assign(problem.num_vars, 0.0);
    return out;
  }

  Tableau tab(s);

  std::vector<double> phase1_cost(tab.total_cols(), 0.0);
  for (std::size_t j = tab.num_std(); j < tab.total_cols(); ++j) phase1_cost[j] = 1.0;
  if (!tab.run(phase1_cost, /*allow_artificials=*/true)) {
    out.status = LpStatus::iteration_limit;
    return out;
  }
  if (tab.unbounded()) throw std::logic_error("lp: phase 1 cannot be unbounded");
  if (tab.objective_value(phase1_cost) > feas_tol) {
    out.status = LpStatus::infeasible;
    out.iterations = tab.iterations();
    return out;
  }
  tab.remove_basic_artificials();

  std::vector<double> cost(tab.total_cols(), 0.0);
  for (std::size_t j = 0; j < s.num_std; ++j) cost[j] = s.c[j];
  if (!tab.run(cost, /*allow_artificials=*/false)) {
    out.status = LpStatus::iteration_limit;
    return out;
  }
  out.iterations = tab.iterations();
  if (tab.unbounded()) {
    out.status = LpStatus::unbounded;
    return out;
  }

  const std::vector<double> xstd = tab.basic_solution();
  out.x.assign(problem.num_vars, 0.0);
  for (std::size_t j = 0; j < problem.num_vars; ++j) {
    double v = xstd[s.plus[j]];
    if (s.minus[j] != Standardized::npos) v -= xstd[s.minus[j]];
    out.x[j] = v;
  }
  out.objective = tab.objective_value(cost);

  // Certificate against the unpivoted standardized data. Rows dropped as
  // redundant do not change the optimum, so the certificate over the
  // surviving rows is the honest one.
  std::vector<std::size_t> art_origin;
  const std::vector<double> y = tab.duals(cost, art_origin);
  double dual_obj = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dual_obj += y[i] * s.b[art_origin[i]];
  double infeas = 0.0;
  for (std::size_t j = 0; j < s.num_std; ++j) {
    double ay = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) ay += y[i] * s.a[art_origin[i]][j];
    infeas = std::max(infeas, ay - s.c[j]);
  }
  out.dual_objective = dual_obj;
  out.duality_gap = std::abs(out.objective - dual_obj);
  out.dual_infeasibility = infeas;
  out.status = LpStatus::optimal;
  return out;
}

}  // namespace rectex
