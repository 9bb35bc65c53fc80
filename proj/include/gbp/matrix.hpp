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

#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace gbp {

// Error hierarchy shared by the whole library. Everything derives from
// gbp::Error so callers can catch broadly or by category.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

// Bad user-supplied values (non-finite entries, out-of-range labels, ...).
struct InputError : Error {
  using Error::Error;
};

// Numerically rank-deficient input to QR/qf/SVD-based projections.
struct RankDeficiencyError : Error {
  using Error::Error;
};

// A point that was required to lie on a manifold does not.
struct FeasibilityError : Error {
  using Error::Error;
};

// A retraction could not produce a feasible point.
struct RetractionError : Error {
  using Error::Error;
};

// API misuse (stale caches, inconsistent call sequences).
struct UsageError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Training aborted on a non-finite loss.
struct DivergenceError : Error {
  DivergenceError(const std::string& msg, int epoch_index)
      : Error(msg), epoch(epoch_index) {}
  int epoch;
};

/// Dense row-major matrix of 64-bit reals. The single numeric carrier for
/// weights, gradients and data batches.
class Matrix {
 public:
  Matrix() = default;

  // Zero-filled. Internal computations build results through this
  // constructor, so no finiteness check happens here.
  Matrix(int rows, int cols);

  // From user-supplied data: validates length and that every entry is finite.
  Matrix(int rows, int cols, std::vector<double> values);

  static Matrix identity(int n);
  // First p columns of the n-by-n identity.
  static Matrix identity_columns(int n, int p);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix diagonal(const std::vector<double>& entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  const double& operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix& a, const Matrix& b);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a);
Matrix operator*(double s, const Matrix& a);
Matrix operator*(const Matrix& a, double s);

Matrix transpose(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& a);

std::string shape_string(const Matrix& a);

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* where) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(where) + ": shape mismatch " + shape_string(a) +
                         " vs " + shape_string(b));
  }
}

}  // namespace gbp
