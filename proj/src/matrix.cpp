// Copyright 2026 The gbp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gbp/matrix.hpp"

#include <cmath>
#include <cstdlib>

namespace gbp {

namespace {

void check_positive_dims(int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    throw DimensionError("matrix dimensions must be positive, got (" +
                         std::to_string(rows) + ", " + std::to_string(cols) + ")");
  }
}

}  // namespace

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  check_positive_dims(rows, cols);
  data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  check_positive_dims(rows, cols);
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw DimensionError("data length " + std::to_string(data_.size()) +
                         " does not match shape (" + std::to_string(rows) + ", " +
                         std::to_string(cols) + ")");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw InputError("matrix entries must be finite");
    }
  }
}

Matrix Matrix::identity(int n) { return identity_columns(n, n); }

Matrix Matrix::identity_columns(int n, int p) {
  Matrix m(n, p);
  const int k = p < n ? p : n;
  for (int i = 0; i < k; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  if (r == 0) throw DimensionError("from_rows: empty row list");
  const int c = static_cast<int>(rows.begin()->size());
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(r) * c);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) {
      throw DimensionError("from_rows: ragged rows");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::diagonal(const std::vector<double>& entries) {
  const int n = static_cast<int>(entries.size());
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = entries[i];
  return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  check_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  check_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

bool operator==(const Matrix& a, const Matrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  out += b;
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  out -= b;
  return out;
}

Matrix operator-(const Matrix& a) {
  Matrix out = a;
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) = -out(i, j);
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  out *= s;
  return out;
}

Matrix operator*(const Matrix& a, double s) { return s * a; }

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

double frobenius_norm(const Matrix& a) {
  double sum = 0.0;
  const double* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) sum += p[i] * p[i];
  return std::sqrt(sum);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  const double* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(p[i]));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

bool all_finite(const Matrix& a) {
  const double* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

std::string shape_string(const Matrix& a) {
  return "(" + std::to_string(a.rows()) + ", " + std::to_string(a.cols()) + ")";
}

}  // namespace gbp
