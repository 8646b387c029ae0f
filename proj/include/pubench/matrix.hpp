#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pubench/error.hpp"

namespace pubench {

using Vector = std::vector<double>;

// Dense row-major matrix. One row per sample.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double>& data() const noexcept { return data_; }

  // Sets the column count on an empty matrix; rows can then be appended.
  void reshape_empty(std::size_t cols) {
    if (rows_ != 0) throw ValidationError("reshape_empty on non-empty matrix");
    cols_ = cols;
  }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) {
      throw ValidationError("row has " + std::to_string(values.size()) +
                            " columns, expected " + std::to_string(cols_));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(0, m.cols());
  out.reserve_rows(indices.size());
  for (std::size_t i : indices) out.append_row(m.row(i));
  return out;
}

// Rows of `top` followed by rows of `bottom`.
inline Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) {
    throw ValidationError("vstack: column mismatch (" + std::to_string(top.cols()) +
                          " vs " + std::to_string(bottom.cols()) + ")");
  }
  Matrix out(0, top.cols());
  out.reserve_rows(top.rows() + bottom.rows());
  for (std::size_t i = 0; i < top.rows(); ++i) out.append_row(top.row(i));
  for (std::size_t i = 0; i < bottom.rows(); ++i) out.append_row(bottom.row(i));
  return out;
}

}  // namespace pubench
