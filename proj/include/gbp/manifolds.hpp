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
#include <string>

#include "gbp/matrix.hpp"

namespace gbp::manifolds {

// Runtime feasibility tolerance: well above the ~1e-12 defect a fresh
// retraction leaves, well below any optimization-visible drift.
inline constexpr double kFeasibilityTol = 1e-8;

enum class ManifoldKind { kEuclidean, kStiefel, kOblique };

/// Declares which constraint set a parameter lives on, together with the
/// (n, p) shape of the governed matrix:
///   Euclidean — no constraint;
///   Stiefel   — orthonormal columns, W^T W = I_p (requires p <= n);
///   Oblique   — unit-norm columns (requires p <= n).
struct ManifoldDescriptor {
  ManifoldKind kind = ManifoldKind::kEuclidean;
  int n = 0;
  int p = 0;

  bool operator==(const ManifoldDescriptor&) const = default;
};

ManifoldDescriptor euclidean(int n, int p);
ManifoldDescriptor stiefel(int n, int p);
ManifoldDescriptor oblique(int n, int p);

std::string kind_name(ManifoldKind kind);

struct FeasibilityResult {
  double defect = 0.0;
  bool ok = true;
};

/// Projects an ambient gradient onto the tangent space at w.
///   Euclidean: g unchanged (bitwise).
///   Stiefel:   g - w sym(w^T g).
///   Oblique:   g - w DiagOnly(w^T g), i.e. each column loses its radial part.
/// Throws FeasibilityError when w is off the manifold, DimensionError on
/// shape mismatch.
Matrix tangent_project(const ManifoldDescriptor& m, const Matrix& w, const Matrix& g);

/// Carries a tangent step back onto the manifold. Euclidean: w + xi
/// (bitwise addition). Stiefel: qf(w + xi). Oblique: column renormalization.
/// Assumes w feasible; throws RetractionError when the stepped point cannot
/// be retracted (rank-deficient w + xi, or a zero column).
Matrix retract(const ManifoldDescriptor& m, const Matrix& w, const Matrix& xi);

/// Measures the constraint defect of w: ||w^T w - I||_F for Stiefel, the
/// worst column-norm deviation for Oblique, 0 for Euclidean. Pure
/// measurement; `ok` reports defect <= tol.
FeasibilityResult check_feasible(const ManifoldDescriptor& m, const Matrix& w,
                                 double tol = kFeasibilityTol);

/// Deterministic random feasible point for the given seed.
Matrix random_point(const ManifoldDescriptor& m, std::uint64_t seed);

/// Intrinsic dimension: Euclidean np, Stiefel np - p(p+1)/2, Oblique (n-1)p.
long long manifold_dim(const ManifoldDescriptor& m);

/// Nearest Stiefel point in Frobenius norm (the polar factor U V^T).
/// Throws RankDeficiencyError on rank-deficient input.
Matrix pgd_project_stiefel(const Matrix& a);

/// Metric projection onto the manifold, used by the PGD baseline.
Matrix metric_project(const ManifoldDescriptor& m, const Matrix& a);

/// Re-feasibilizes a drifted point: qf for Stiefel, renormalization for
/// Oblique, identity for Euclidean.
Matrix refeasibilize(const ManifoldDescriptor& m, const Matrix& w);

}  // namespace gbp::manifolds
