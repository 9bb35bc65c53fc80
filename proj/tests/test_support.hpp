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

#include <cstdint>

#include "gbp/linalg.hpp"
#include "gbp/manifolds.hpp"
#include "gbp/matrix.hpp"
#include "gbp/rng.hpp"

namespace gbp::test {

inline Matrix random_matrix(int rows, int cols, std::uint64_t seed, double stddev = 1.0) {
  Rng rng(seed);
  return gaussian_matrix(rows, cols, rng, stddev);
}

inline Matrix random_stiefel(int n, int p, std::uint64_t seed) {
  return manifolds::random_point(manifolds::stiefel(n, p), seed);
}

inline double orthogonality_defect(const Matrix& q) {
  return frobenius_norm(linalg::matmul(transpose(q), q) - Matrix::identity(q.cols()));
}

// Independent of the library matmul: plain index arithmetic only.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (int l = 0; l < a.cols(); ++l) acc += a(i, l) * b(l, j);
      c(i, j) = acc;
    }
  return c;
}

}  // namespace gbp::test
