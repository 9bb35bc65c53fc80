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

#include <cmath>
#include <string>
#include <vector>

#include "gbp/linalg.hpp"

// Plain serial kernels. These deliberately duplicate the loop nests of the
// OpenMP kernels (minus the pragmas) so the test suite can assert bitwise
// agreement between the two, and the benchmark can time them side by side.

namespace gbp::linalg::serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("serial::matmul: inner dimensions differ, " + shape_string(a) +
                         " * " + shape_string(b));
  }
  const int m = a.rows();
  const int k = a.cols();
  const int n = b.cols();
  Matrix c(m, n);
  // Naive triple loop; per-entry accumulation order matches the OpenMP kernel.
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += a(i, l) * b(l, j);
      c(i, j) = acc;
    }
  }
  return c;
}

Matrix sym(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("serial::sym: square matrix required, got " + shape_string(a));
  }
  const int n = a.rows();
  Matrix s(n, n);
  for (int i = 0; i < n; ++i) {
    s(i, i) = a(i, i);
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

QrResult householder_qr(const Matrix& a) {
  if (a.rows() < a.cols()) {
    throw DimensionError("serial::householder_qr: need rows >= cols, got " +
                         shape_string(a));
  }
  const int n = a.rows();
  const int p = a.cols();
  const double rank_tol = kRankTolScale * frobenius_norm(a);

  Matrix work = a;
  Matrix vs(n, p);
  std::vector<double> taus(p, 0.0);

  auto apply = [&vs, n](int k, double tau, Matrix& m, int j) {
    double s = m(k, j);
    for (int i = k + 1; i < n; ++i) s += vs(i, k) * m(i, j);
    s *= tau;
    m(k, j) -= s;
    for (int i = k + 1; i < n; ++i) m(i, j) -= s * vs(i, k);
  };

  for (int k = 0; k < p; ++k) {
    double norm2 = 0.0;
    for (int i = k; i < n; ++i) norm2 += work(i, k) * work(i, k);
    const double norm = std::sqrt(norm2);
    if (norm <= rank_tol) {
      throw RankDeficiencyError("serial::householder_qr: column " + std::to_string(k) +
                                " is numerically rank deficient");
    }
    const double alpha = work(k, k) > 0.0 ? -norm : norm;
    const double v0 = work(k, k) - alpha;
    double vtv = 1.0;
    for (int i = k + 1; i < n; ++i) {
      const double vi = work(i, k) / v0;
      vs(i, k) = vi;
      vtv += vi * vi;
    }
    taus[k] = 2.0 / vtv;
    work(k, k) = alpha;
    for (int i = k + 1; i < n; ++i) work(i, k) = 0.0;
    for (int j = k + 1; j < p; ++j) apply(k, taus[k], work, j);
  }

  Matrix q = Matrix::identity_columns(n, p);
  for (int k = p - 1; k >= 0; --k) {
    for (int j = k; j < p; ++j) apply(k, taus[k], q, j);
  }

  Matrix r(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) r(i, j) = work(i, j);

  for (int k = 0; k < p; ++k) {
    if (r(k, k) < 0.0) {
      for (int i = 0; i < n; ++i) q(i, k) = -q(i, k);
      for (int j = k; j < p; ++j) r(k, j) = -r(k, j);
    }
  }
  return {std::move(q), std::move(r)};
}

Matrix qf(const Matrix& a) { return householder_qr(a).q; }

}  // namespace gbp::linalg::serial
