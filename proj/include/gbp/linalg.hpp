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

#include <vector>

#include "gbp/matrix.hpp"

namespace gbp::linalg {

// A column is treated as rank-deficient when its post-elimination norm falls
// below kRankTolScale times the Frobenius norm of the input.
inline constexpr double kRankTolScale = 1e-12;

// Jacobi eigensolver stops when the off-diagonal Frobenius norm drops below
// kJacobiTolScale * ||A||_F, or after kJacobiMaxSweeps sweeps.
inline constexpr double kJacobiTolScale = 1e-14;
inline constexpr int kJacobiMaxSweeps = 100;

// OpenMP kernels fall back to their serial loop below this much work
// (roughly flops); the value of the result never depends on the choice.
inline constexpr long long kOmpMinWork = 1LL << 15;

struct QrResult {
  Matrix q;  // n x p, orthonormal columns
  Matrix r;  // p x p, upper triangular with strictly positive diagonal
};

struct EighResult {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // columns, orthonormal
};

// A Gram-matrix eigenvalue is treated as a zero singular value below this
// fraction of the Gram Frobenius norm. The eigensolver cannot resolve
// squared singular values any finer, so this is the honest zero threshold
// for the thin_svd route.
inline constexpr double kSvdZeroTolScale = 1e-12;

struct SvdResult {
  Matrix u;                            // n1 x p
  std::vector<double> singular_values; // nonnegative, non-increasing
  Matrix v;                            // n2 x p
  // Number of returned singular values above the zero threshold; columns
  // beyond it are an orthonormal completion and carry singular value 0.
  int effective_rank = 0;
};

Matrix matmul(const Matrix& a, const Matrix& b);

/// sym(A) = (A + A^T)/2. Output is exactly symmetric: symmetric index pairs
/// are averaged once and written to both slots.
Matrix sym(const Matrix& a);

/// Thin Householder QR of an n x p matrix (n >= p), normalized so that the
/// diagonal of R is strictly positive. Throws RankDeficiencyError when a
/// pivot column's remaining norm falls under the rank tolerance.
QrResult householder_qr(const Matrix& a);

/// Adjusted Q factor of the thin QR decomposition: the unique Q such that
/// A = QR with R upper triangular and positive diagonal.
Matrix qf(const Matrix& a);

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues are returned in descending order. Throws InputError when the
/// input is asymmetric beyond tolerance.
EighResult jacobi_eigh(const Matrix& a);

/// Rank-p truncated SVD via eigendecomposition of the smaller Gram matrix.
/// Singular values below the rank tolerance are reported as computed but the
/// corresponding factor columns are completed with an orthonormal basis of a
/// random complement, so U and V always have orthonormal columns.
SvdResult thin_svd(const Matrix& a, int rank);

// Serial reference kernels. Same algorithms, plain loops, no OpenMP; kept
// for cross-checking the parallel kernels and for the benchmark target.
namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix sym(const Matrix& a);
QrResult householder_qr(const Matrix& a);
Matrix qf(const Matrix& a);

}  // namespace serial

}  // namespace gbp::linalg
