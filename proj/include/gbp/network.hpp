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
#include <vector>

#include "gbp/manifolds.hpp"
#include "gbp/matrix.hpp"

namespace gbp::nn {

enum class ActivationKind { kIdentity, kSigmoid, kTanh, kRelu };
enum class LayerKind { kFullyConnected, kDiagonalScale, kActivation };
enum class LossKind { kMseReconstruction, kSoftmaxCrossEntropy };

// Weight application convention for fully-connected layers. Weights are
// always stored as an (n x p) matrix with p <= n so constraint descriptors
// apply to a tall matrix:
//   kTransposed: y = W^T x + b, maps R^n -> R^p (the default convention);
//   kPlain:      y = W x + b,   maps R^p -> R^n (decode/synthesis side).
enum class FcApply { kTransposed, kPlain };

struct LayerSpec {
  LayerKind kind = LayerKind::kFullyConnected;
  int in_dim = 0;
  int out_dim = 0;
  // Index into the network's parameter list; -1 for activation layers.
  // Two layers may share one parameter (their gradients accumulate).
  int param = -1;
  FcApply apply = FcApply::kTransposed;
  ActivationKind activation = ActivationKind::kIdentity;
  bool has_bias = false;

  bool operator==(const LayerSpec&) const = default;
};

/// Live state of one parameter: weights, optional bias (stored p x 1), and
/// the momentum buffers the optimizer maintains alongside them.
struct ParamState {
  Matrix weights;
  Matrix bias;  // (len x 1); empty when the parameter carries no bias
  manifolds::ManifoldDescriptor manifold;
  Matrix momentum;       // same shape as weights, zero until first use
  Matrix bias_momentum;  // same shape as bias

  bool has_bias() const { return !bias.empty(); }
};

ParamState make_param(Matrix weights, manifolds::ManifoldDescriptor manifold,
                      int bias_len = 0);

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  LossKind loss = LossKind::kMseReconstruction;

  bool operator==(const NetworkSpec&) const = default;
};

/// Throws if layer dims do not chain, parameter indices are out of range, or
/// weight shapes do not match the layer and manifold declarations.
void validate_network(const NetworkSpec& net, const std::vector<ParamState>& params);

int network_input_dim(const NetworkSpec& net);
int network_output_dim(const NetworkSpec& net);

// ---------------------------------------------------------------------------
// Layer primitives
// ---------------------------------------------------------------------------

/// y = W^T x + b column-wise (or y = W x + b with kPlain).
Matrix fc_forward(const Matrix& w, const Matrix& bias, const Matrix& x,
                  FcApply apply = FcApply::kTransposed);

struct FcGrads {
  Matrix grad_w;
  Matrix grad_b;  // (p x 1), empty if no bias requested
  Matrix grad_x;
};

/// Standalone FC backward under the per-sample-upstream convention: upstream
/// carries per-sample loss gradients, parameter gradients are batch means
/// (grad_w = x upstream^T / B, grad_b = row-mean), and the input gradient is
/// propagated unnormalized (grad_x = w upstream). The network-level backward
/// pass below uses the plain chain rule instead, with the 1/B factor carried
/// once by the loss gradient.
FcGrads fc_backward(const Matrix& w, const Matrix& x, const Matrix& upstream,
                    FcApply apply = FcApply::kTransposed, bool want_bias = true);

Matrix activation_forward(ActivationKind kind, const Matrix& z);
/// Multiplies upstream by the elementwise derivative at the cached
/// pre-activation z. The relu derivative at exactly 0 is 0.
Matrix activation_backward(ActivationKind kind, const Matrix& z, const Matrix& upstream);

struct LossResult {
  double value = 0.0;
  Matrix grad;  // d(loss)/d(output), including the 1/B batch mean
};

/// loss = (1/B) sum_i ||x_hat_i - x_i||^2, grad = (2/B)(x_hat - x).
LossResult mse_reconstruction_loss(const Matrix& x_hat, const Matrix& x);

/// Mean cross-entropy with max-subtracted softmax; grad = (softmax - onehot)/B.
LossResult softmax_ce_loss(const Matrix& logits, const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Whole-network forward/backward
// ---------------------------------------------------------------------------

struct ForwardCache {
  std::vector<Matrix> inputs;  // input seen by each layer
  Matrix output;
  int batch = 0;
};

ForwardCache network_forward(const NetworkSpec& net, const std::vector<ParamState>& params,
                             const Matrix& x);

struct ParamGrads {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;  // empty matrices for parameters without bias
};

/// Reverse-order chain rule seeded with d(loss)/d(output). Returns the raw
/// Euclidean gradient for every parameter; any manifold projection is the
/// optimizer's job. Throws UsageError when the cache does not match the net.
ParamGrads network_backward(const NetworkSpec& net, const std::vector<ParamState>& params,
                            const ForwardCache& cache, const Matrix& loss_grad);

/// Targets for a loss evaluation: `dense` for reconstruction losses,
/// `labels` for classification.
struct Targets {
  Matrix dense;
  std::vector<int> labels;
};

LossResult network_loss(const NetworkSpec& net, const Matrix& output, const Targets& targets);

struct EvalResult {
  double loss = 0.0;
  ParamGrads grads;
  Matrix output;
};

EvalResult network_loss_and_grads(const NetworkSpec& net, const std::vector<ParamState>& params,
                                  const Matrix& x, const Targets& targets);

/// Central-difference check of every parameter entry against the backprop
/// gradient; returns the max relative error max(|fd-bp|) / max(|fd|,|bp|,1e-8).
double finite_diff_check(const NetworkSpec& net, const std::vector<ParamState>& params,
                         const Matrix& x, const Targets& targets, double h);

// ---------------------------------------------------------------------------
// Composite layers
// ---------------------------------------------------------------------------

/// Appends the composite z = f(W2 W1^T x + b): an orthonormal-column FC
/// (n x p, no bias), a diagonal scale with bias, then the activation. The
/// effective weight W1 W2 keeps (W1 W2)^T (W1 W2) diagonal under training.
/// Returns the index of the first appended layer.
int append_noncompact_stiefel_layer(NetworkSpec& net, std::vector<ParamState>& params,
                                    int n, int p, ActivationKind activation,
                                    std::uint64_t seed);

struct LowRankFactors {
  Matrix u;               // n1 x p, orthonormal columns
  std::vector<double> d;  // p singular values
  Matrix v;               // n2 x p, orthonormal columns
  int rank = 0;
};

/// Truncated SVD of an FC weight at the smallest rank whose cumulative
/// squared-singular-value energy reaches energy_percent of the total.
LowRankFactors factorize_fc_lowrank(const Matrix& w, double energy_percent);
/// Same with an explicit rank override.
LowRankFactors factorize_fc_lowrank_rank(const Matrix& w, int rank);

/// Reported parameter count of the factored structure: (n1 + n2 - p + 2) p.
long long lowrank_param_count(int n1, int n2, int p);

/// Replaces the FC layer at layer_index with the three-layer factored
/// structure realizing f(U D V^T x + b); U and V are tagged as
/// orthonormal-column parameters, D and the bias stay unconstrained.
/// The replaced parameter must not be shared with another layer.
void replace_fc_with_lowrank(NetworkSpec& net, std::vector<ParamState>& params,
                             int layer_index, const LowRankFactors& factors);

/// Raw stored parameter count (weight entries plus bias entries).
long long network_param_count(const NetworkSpec& net, const std::vector<ParamState>& params);

}  // namespace gbp::nn
