#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace rectex {

// Dense row-major matrix of doubles. Deliberately minimal: the networks and
// factorizations here are desk scale, so there is no need for an external
// linear algebra dependency.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const;

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix subtract(const Matrix& a, const Matrix& b);

// y = M x.
std::vector<double> apply(const Matrix& m, std::span<const double> x);

// max over rows of the row's L1 norm, i.e. the operator infinity-norm.
double induced_inf_norm(const Matrix& a);

bool all_finite(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace rectex
