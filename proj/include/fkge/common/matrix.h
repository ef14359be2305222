/*
 * Copyright 2026 The FKGE Privacy Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FKGE_COMMON_MATRIX_H_
#define FKGE_COMMON_MATRIX_H_

#include <cstddef>
#include <cstring>
#include <span>
#include <vector>

namespace fkge {

// Dense row-major matrix of doubles. Rows are handed out as spans so kernels
// never see raw pointer arithmetic.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  void SetRow(std::size_t r, std::span<const double> values) {
    std::memcpy(data_.data() + r * cols_, values.data(),
                cols_ * sizeof(double));
  }

  // Bitwise comparison of one row against the same row of `other`.
  bool RowBitEqual(std::size_t r, const Matrix& other) const {
    return std::memcmp(data_.data() + r * cols_, other.data_.data() + r * cols_,
                       cols_ * sizeof(double)) == 0;
  }

  bool SameShape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double Dot(std::span<const double> a, std::span<const double> b);
double SquaredNorm(std::span<const double> a);
double Norm(std::span<const double> a);
double SquaredDistance(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
void Scale(double alpha, std::span<double> x);

}  // namespace fkge

#endif  // FKGE_COMMON_MATRIX_H_
