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

#include "gbp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gbp/rng.hpp"

// Parallelization policy: loops are split only across independent output
// rows/columns, each computed start-to-finish by one thread in a fixed
// order. No reduction is ever shared between threads, so results are
// bitwise identical to the serial kernels for any thread count.

namespace gbp::linalg {

namespace {

constexpr std::uint64_t kSvdCompletionSeed = 0x5eedba5e0fULL;

void check_shape_for_qr(const Matrix& a) {
  if (a.rows() < a.cols()) {
    throw DimensionError("householder_qr: need rows >= cols, got " + shape_string(a));
  }
}

// Shared by the parallel and Q-forming paths: applies H = I - tau*v*v^T
// (v implicit with v[k] = 1, tail in vs column k) to column j of m, rows k..n-1.
inline void apply_reflector_to_column(const Matrix& vs, int k, double tau, Matrix& m,
                                      int j) {
  const int n = m.rows();
  double s = m(k, j);
  for (int i = k + 1; i < n; ++i) s += vs(i, k) * m(i, j);
  s *= tau;
  m(k, j) -= s;
  for (int i = k + 1; i < n; ++i) m(i, j) -= s * vs(i, k);
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(a) + " * " +
                         shape_string(b));
  }
  const int m = a.rows();
  const int k = a.cols();
  const int n = b.cols();
  Matrix c(m, n);
  const bool par = static_cast<long long>(m) * n * k >= kOmpMinWork;
#pragma omp parallel for if (par) schedule(static)
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < k; ++l) {
      const double ail = a(i, l);
      for (int j = 0; j < n; ++j) c(i, j) += ail * b(l, j);
    }
  }
  return c;
}

Matrix sym(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("sym: square matrix required, got " + shape_string(a));
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
  check_shape_for_qr(a);
  const int n = a.rows();
  const int p = a.cols();
  const double rank_tol = kRankTolScale * frobenius_norm(a);

  Matrix work = a;     // becomes R in its top p x p block
  Matrix vs(n, p);     // Householder vectors, tail of column k in rows k+1..n-1
  std::vector<double> taus(p, 0.0);
  const bool par = static_cast<long long>(n) * p * p >= kOmpMinWork;

  for (int k = 0; k < p; ++k) {
    double norm2 = 0.0;
    for (int i = k; i < n; ++i) norm2 += work(i, k) * work(i, k);
    const double norm = std::sqrt(norm2);
    if (norm <= rank_tol) {
      throw RankDeficiencyError("householder_qr: column " + std::to_string(k) +
                                " is numerically rank deficient");
    }
    // Sign chosen opposite to the pivot so v0 = x0 - alpha never cancels.
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

#pragma omp parallel for if (par) schedule(static)
    for (int j = k + 1; j < p; ++j) apply_reflector_to_column(vs, k, taus[k], work, j);
  }

  // Accumulate the thin Q by applying the reflectors in reverse to I(n, p).
  // When H_k is applied, columns j < k are still untouched unit vectors.
  Matrix q = Matrix::identity_columns(n, p);
  for (int k = p - 1; k >= 0; --k) {
#pragma omp parallel for if (par) schedule(static)
    for (int j = k; j < p; ++j) apply_reflector_to_column(vs, k, taus[k], q, j);
  }

  Matrix r(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) r(i, j) = work(i, j);

  // Normalize to a strictly positive diagonal of R: flip the sign of every
  // Q column whose corresponding R diagonal entry is negative.
  for (int k = 0; k < p; ++k) {
    if (r(k, k) < 0.0) {
      for (int i = 0; i < n; ++i) q(i, k) = -q(i, k);
      for (int j = k; j < p; ++j) r(k, j) = -r(k, j);
    }
  }
  return {std::move(q), std::move(r)};
}

Matrix qf(const Matrix& a) { return householder_qr(a).q; }

EighResult jacobi_eigh(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("jacobi_eigh: square matrix required, got " + shape_string(a));
  }
  const int n = a.rows();
  const double anorm = frobenius_norm(a);
  const Matrix asym_part = a - transpose(a);
  if (frobenius_norm(asym_part) > 1e-10 * anorm) {
    throw InputError("jacobi_eigh: input is asymmetric beyond tolerance");
  }

  Matrix b = sym(a);
  Matrix v = Matrix::identity(n);
  const double thresh = kJacobiTolScale * anorm;

  auto offdiag_norm = [&b, n]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) s += b(i, j) * b(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    if (offdiag_norm() <= thresh) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = b(p, q);
        if (apq == 0.0) continue;
        const double theta = (b(q, q) - b(p, p)) / (2.0 * apq);
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = b(p, p);
        const double aqq = b(q, q);
        b(p, p) = app - t * apq;
        b(q, q) = aqq + t * apq;
        b(p, q) = 0.0;
        b(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = b(r, p);
            const double arq = b(r, q);
            b(r, p) = arp - s * (arq + tau * arp);
            b(p, r) = b(r, p);
            b(r, q) = arq + s * (arp - tau * arq);
            b(q, r) = b(r, q);
          }
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&b](int i, int j) { return b(i, i) > b(j, j); });

  EighResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    out.eigenvalues[j] = b(order[j], order[j]);
    for (int i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
  }
  return out;
}

SvdResult thin_svd(const Matrix& a, int rank) {
  const int n1 = a.rows();
  const int n2 = a.cols();
  const int pmax = std::min(n1, n2);
  if (rank < 1 || rank > pmax) {
    throw DimensionError("thin_svd: rank " + std::to_string(rank) +
                         " out of range for shape " + shape_string(a));
  }
  // Eigendecompose the smaller Gram matrix, then recover the other factor
  // by A v / s (or A^T u / s). Eigenvalues at the solver's noise floor are
  // zero singular values; their factor columns are filled from an
  // orthonormal completion of a seeded random complement.
  const bool gram_right = n2 <= n1;  // A^T A when the column space is smaller
  const Matrix gram = gram_right ? matmul(transpose(a), a) : matmul(a, transpose(a));
  const EighResult eig = jacobi_eigh(gram);
  const double lambda_cutoff = kSvdZeroTolScale * frobenius_norm(gram);

  SvdResult out;
  out.singular_values.resize(rank);
  for (int i = 0; i < rank; ++i) {
    const bool is_zero = eig.eigenvalues[i] <= lambda_cutoff;
    out.singular_values[i] = is_zero ? 0.0 : std::sqrt(eig.eigenvalues[i]);
    if (!is_zero) out.effective_rank = i + 1;
  }

  const int gdim = gram_right ? n2 : n1;
  Matrix small_factor(gdim, rank);
  for (int i = 0; i < gdim; ++i)
    for (int j = 0; j < rank; ++j) small_factor(i, j) = eig.eigenvectors(i, j);

  const Matrix& mapped_src = a;
  Matrix big_raw = gram_right ? matmul(mapped_src, small_factor)
                              : matmul(transpose(mapped_src), small_factor);
  const int bdim = big_raw.rows();

  Matrix big_factor(bdim, rank);
  std::vector<int> deferred;
  for (int j = 0; j < rank; ++j) {
    const double s = out.singular_values[j];
    if (s > 0.0) {
      for (int i = 0; i < bdim; ++i) big_factor(i, j) = big_raw(i, j) / s;
    } else {
      deferred.push_back(j);
    }
  }
  if (!deferred.empty()) {
    Rng rng(kSvdCompletionSeed);
    Matrix candidate(bdim, rank);
    for (int j = 0; j < rank; ++j) {
      const bool is_deferred =
          std::find(deferred.begin(), deferred.end(), j) != deferred.end();
      for (int i = 0; i < bdim; ++i) {
        candidate(i, j) = is_deferred ? rng.normal() : big_factor(i, j);
      }
    }
    const Matrix completed = qf(candidate);
    for (int j : deferred) {
      for (int i = 0; i < bdim; ++i) big_factor(i, j) = completed(i, j);
    }
  }

  if (gram_right) {
    out.v = std::move(small_factor);
    out.u = std::move(big_factor);
  } else {
    out.u = std::move(small_factor);
    out.v = std::move(big_factor);
  }
  return out;
}

}  // namespace gbp::linalg
