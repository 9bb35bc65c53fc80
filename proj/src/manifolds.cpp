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

#include "gbp/manifolds.hpp"

#include <cmath>

#include "gbp/linalg.hpp"
#include "gbp/rng.hpp"

namespace gbp::manifolds {

namespace {

void check_shape_matches(const ManifoldDescriptor& m, const Matrix& w, const char* where) {
  if (w.rows() != m.n || w.cols() != m.p) {
    throw DimensionError(std::string(where) + ": matrix " + shape_string(w) +
                         " does not match descriptor (" + std::to_string(m.n) + ", " +
                         std::to_string(m.p) + ")");
  }
}

void require_feasible(const ManifoldDescriptor& m, const Matrix& w, const char* where) {
  const FeasibilityResult f = check_feasible(m, w);
  if (!f.ok) {
    throw FeasibilityError(std::string(where) + ": point is off the " +
                           kind_name(m.kind) + " manifold, defect " +
                           std::to_string(f.defect));
  }
}

double column_norm(const Matrix& w, int j) {
  double s = 0.0;
  for (int i = 0; i < w.rows(); ++i) s += w(i, j) * w(i, j);
  return std::sqrt(s);
}

Matrix normalize_columns(const Matrix& a, const char* where) {
  Matrix out = a;
  for (int j = 0; j < a.cols(); ++j) {
    const double norm = column_norm(a, j);
    if (norm == 0.0) {
      throw RetractionError(std::string(where) + ": column " + std::to_string(j) +
                            " is zero");
    }
    for (int i = 0; i < a.rows(); ++i) out(i, j) = a(i, j) / norm;
  }
  return out;
}

ManifoldDescriptor make(ManifoldKind kind, int n, int p, bool need_tall) {
  if (n <= 0 || p <= 0) {
    throw DimensionError("manifold descriptor dimensions must be positive");
  }
  if (need_tall && p > n) {
    throw DimensionError(kind_name(kind) + " requires p <= n, got (" +
                         std::to_string(n) + ", " + std::to_string(p) + ")");
  }
  return ManifoldDescriptor{kind, n, p};
}

}  // namespace

ManifoldDescriptor euclidean(int n, int p) {
  return make(ManifoldKind::kEuclidean, n, p, false);
}

ManifoldDescriptor stiefel(int n, int p) { return make(ManifoldKind::kStiefel, n, p, true); }

ManifoldDescriptor oblique(int n, int p) { return make(ManifoldKind::kOblique, n, p, true); }

std::string kind_name(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::kEuclidean: return "euclidean";
    case ManifoldKind::kStiefel: return "stiefel";
    case ManifoldKind::kOblique: return "oblique";
  }
  return "unknown";
}

Matrix tangent_project(const ManifoldDescriptor& m, const Matrix& w, const Matrix& g) {
  check_shape_matches(m, w, "tangent_project");
  check_same_shape(w, g, "tangent_project");
  if (m.kind == ManifoldKind::kEuclidean) return g;
  require_feasible(m, w, "tangent_project");

  if (m.kind == ManifoldKind::kStiefel) {
    const Matrix wtg = linalg::matmul(transpose(w), g);
    return g - linalg::matmul(w, linalg::sym(wtg));
  }

  // Oblique: remove each column's radial component.
  Matrix out = g;
  for (int j = 0; j < m.p; ++j) {
    double d = 0.0;
    for (int i = 0; i < m.n; ++i) d += w(i, j) * g(i, j);
    for (int i = 0; i < m.n; ++i) out(i, j) = g(i, j) - d * w(i, j);
  }
  return out;
}

Matrix retract(const ManifoldDescriptor& m, const Matrix& w, const Matrix& xi) {
  check_shape_matches(m, w, "retract");
  check_same_shape(w, xi, "retract");
  switch (m.kind) {
    case ManifoldKind::kEuclidean:
      return w + xi;
    case ManifoldKind::kStiefel:
      try {
        return linalg::qf(w + xi);
      } catch (const RankDeficiencyError& e) {
        throw RetractionError(std::string("retract: stepped point is rank deficient (") +
                              e.what() + ")");
      }
    case ManifoldKind::kOblique:
      return normalize_columns(w + xi, "retract");
  }
  throw UsageError("retract: unknown manifold kind");
}

FeasibilityResult check_feasible(const ManifoldDescriptor& m, const Matrix& w, double tol) {
  check_shape_matches(m, w, "check_feasible");
  double defect = 0.0;
  switch (m.kind) {
    case ManifoldKind::kEuclidean:
      defect = 0.0;
      break;
    case ManifoldKind::kStiefel: {
      const Matrix gram = linalg::matmul(transpose(w), w);
      defect = frobenius_norm(gram - Matrix::identity(m.p));
      break;
    }
    case ManifoldKind::kOblique: {
      for (int j = 0; j < m.p; ++j) {
        defect = std::max(defect, std::abs(column_norm(w, j) - 1.0));
      }
      break;
    }
  }
  return {defect, defect <= tol};
}

Matrix random_point(const ManifoldDescriptor& m, std::uint64_t seed) {
  switch (m.kind) {
    case ManifoldKind::kEuclidean: {
      Rng rng(seed);
      return gaussian_matrix(m.n, m.p, rng, 1.0 / std::sqrt(static_cast<double>(m.n)));
    }
    case ManifoldKind::kStiefel: {
      // A Gaussian sample is full rank almost surely; reseed on the
      // measure-zero failure so the function stays total and deterministic.
      for (int attempt = 0; attempt < 8; ++attempt) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        try {
          return linalg::qf(gaussian_matrix(m.n, m.p, rng));
        } catch (const RankDeficiencyError&) {
          continue;
        }
      }
      throw RankDeficiencyError("random_point: repeated rank-deficient samples");
    }
    case ManifoldKind::kOblique: {
      Rng rng(seed);
      return normalize_columns(gaussian_matrix(m.n, m.p, rng), "random_point");
    }
  }
  throw UsageError("random_point: unknown manifold kind");
}

long long manifold_dim(const ManifoldDescriptor& m) {
  const long long n = m.n;
  const long long p = m.p;
  switch (m.kind) {
    case ManifoldKind::kEuclidean: return n * p;
    case ManifoldKind::kStiefel: return n * p - p * (p + 1) / 2;
    case ManifoldKind::kOblique: return (n - 1) * p;
  }
  throw UsageError("manifold_dim: unknown manifold kind");
}

Matrix pgd_project_stiefel(const Matrix& a) {
  if (a.rows() < a.cols()) {
    throw DimensionError("pgd_project_stiefel: need rows >= cols, got " +
                         shape_string(a));
  }
  const int p = a.cols();
  const linalg::SvdResult svd = linalg::thin_svd(a, p);
  if (svd.effective_rank < p) {
    throw RankDeficiencyError("pgd_project_stiefel: input is rank deficient");
  }
  return linalg::matmul(svd.u, transpose(svd.v));
}

Matrix metric_project(const ManifoldDescriptor& m, const Matrix& a) {
  check_shape_matches(m, a, "metric_project");
  switch (m.kind) {
    case ManifoldKind::kEuclidean: return a;
    case ManifoldKind::kStiefel: return pgd_project_stiefel(a);
    case ManifoldKind::kOblique:
      try {
        return normalize_columns(a, "metric_project");
      } catch (const RetractionError& e) {
        throw RankDeficiencyError(e.what());
      }
  }
  throw UsageError("metric_project: unknown manifold kind");
}

Matrix refeasibilize(const ManifoldDescriptor& m, const Matrix& w) {
  check_shape_matches(m, w, "refeasibilize");
  switch (m.kind) {
    case ManifoldKind::kEuclidean: return w;
    case ManifoldKind::kStiefel: return linalg::qf(w);
    case ManifoldKind::kOblique: return normalize_columns(w, "refeasibilize");
  }
  throw UsageError("refeasibilize: unknown manifold kind");
}

}  // namespace gbp::manifolds
