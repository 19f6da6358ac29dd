/*
 * Copyright 2026 The rdtarget Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RDTARGET_COMMON_MATRIX_HPP_
#define RDTARGET_COMMON_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "common/error.hpp"

namespace rdtarget {

// Dense row-major matrix of doubles. One row per customer.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  Matrix select_rows(std::span<const std::size_t> rows) const {
    Matrix out(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto src = row(rows[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  Matrix select_columns(std::size_t first, std::size_t count) const {
    if (first + count > cols_) {
      throw invalid_argument("column range out of bounds");
    }
    Matrix out(rows_, count);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < count; ++c) out(r, c) = (*this)(r, first + c);
    }
    return out;
  }

  // Copy with one extra trailing column set to `value`.
  Matrix with_constant_column(double value) const {
    Matrix out(rows_, cols_ + 1);
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto src = row(r);
      auto dst = out.row(r);
      std::copy(src.begin(), src.end(), dst.begin());
      dst[cols_] = value;
    }
    return out;
  }

  // Copy with `values` appended as a trailing column.
  Matrix with_column(std::span<const double> values) const {
    if (values.size() != rows_) throw invalid_argument("column length mismatch");
    Matrix out = with_constant_column(0.0);
    for (std::size_t r = 0; r < rows_; ++r) out(r, cols_) = values[r];
    return out;
  }

  std::span<const double> data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace rdtarget

#endif  // RDTARGET_COMMON_MATRIX_HPP_
