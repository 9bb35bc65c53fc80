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
#include <functional>
#include <vector>

#include "gbp/manifolds.hpp"
#include "gbp/matrix.hpp"
#include "gbp/metrics.hpp"
#include "gbp/network.hpp"

namespace gbp::optim {

// Drifted constrained weights are re-passed through their retraction every
// this many steps to cancel floating-point drift in long runs.
inline constexpr int kRefeasibilizePeriod = 1000;

enum class Method { kBp, kGbp, kPgd };
enum class LrSchedule { kConstant, kLogLinear, kLinear };

struct OptimizerConfig {
  Method method = Method::kGbp;
  double lr_start = 1e-2;
  double lr_end = 1e-2;
  LrSchedule schedule = LrSchedule::kLogLinear;
  double momentum = 0.0;      // mu in [0, 1]
  double weight_decay = 0.0;  // applied to unconstrained parameters only
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 0;

  bool operator==(const OptimizerConfig&) const = default;
};

void validate_optimizer_config(const OptimizerConfig& config);

/// Learning rate for an epoch: constant, geometric (log-linear) or linear
/// interpolation from lr_start to lr_end. Throws UsageError out of range.
double lr_at(const OptimizerConfig& config, int epoch);

struct StepResult {
  Matrix w;
  Matrix momentum;
};

/// Unconstrained update: theta' = mu theta - eta g; w' = w + theta'.
/// With mu = 0 this is exactly w - eta g.
StepResult bp_step(const Matrix& w, const Matrix& grad, double eta, double mu,
                   const Matrix& theta);

/// Constrained update: the momentum buffer lives in the ambient space, is
/// projected onto the tangent space at the current point, then retracted:
///   theta' = mu theta - eta g;  w' = retract(w, tangent_project(w, theta')).
/// With mu = 0 the update is computed exactly as retract(w, -eta * pi(g)).
StepResult gbp_step(const manifolds::ManifoldDescriptor& m, const Matrix& w,
                    const Matrix& grad, double eta, double mu, const Matrix& theta);

/// Momentum-free constrained update retract(w, -eta * tangent_project(w, g)).
Matrix gbp_step_simple(const manifolds::ManifoldDescriptor& m, const Matrix& w,
                       const Matrix& grad, double eta);

/// Projected gradient descent: Euclidean (momentum) step in the ambient
/// space, then metric projection back onto the constraint set.
StepResult pgd_step(const manifolds::ManifoldDescriptor& m, const Matrix& w,
                    const Matrix& grad, double eta, double mu, const Matrix& theta);

/// Training dataset: features are columns of x. `targets` feeds
/// reconstruction losses (often aliasing x), `labels` classification.
struct Dataset {
  Matrix x;
  Matrix targets;
  std::vector<int> labels;
};

using EpochCallback = std::function<void(const MetricsRecord&)>;

struct TrainHooks {
  EpochCallback on_epoch;
  // Per-feature noise stddev added to inputs (not targets) during training;
  // empty disables corruption.
  std::vector<double> input_noise_std;
};

/// Mini-batch SGD with a seeded shuffle per epoch. Constrained weights are
/// stepped by the configured method, unconstrained weights and all biases by
/// plain bp_step with weight decay. Records per-epoch mean loss (plus
/// accuracy for classification), the max constraint defect, and the learning
/// rate. Throws DivergenceError on a non-finite loss.
std::vector<MetricsRecord> train(const nn::NetworkSpec& net, std::vector<nn::ParamState>& params,
                                 const Dataset& data, const OptimizerConfig& config,
                                 const TrainHooks& hooks = {});

/// Max constraint defect over all constrained parameters.
double max_feasibility_defect(const std::vector<nn::ParamState>& params);

}  // namespace gbp::optim
