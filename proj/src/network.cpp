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

#include "gbp/network.hpp"

#include <algorithm>
#include <cmath>

#include "gbp/linalg.hpp"

namespace gbp::nn {

namespace {

Matrix row_sum(const Matrix& g) {
  Matrix out(g.rows(), 1);
  for (int i = 0; i < g.rows(); ++i) {
    double s = 0.0;
    for (int b = 0; b < g.cols(); ++b) s += g(i, b);
    out(i, 0) = s;
  }
  return out;
}

Matrix row_mean(const Matrix& g) {
  Matrix out = row_sum(g);
  const double inv = 1.0 / g.cols();
  for (int i = 0; i < out.rows(); ++i) out(i, 0) *= inv;
  return out;
}

int fc_in_dim(const Matrix& w, FcApply apply) {
  return apply == FcApply::kTransposed ? w.rows() : w.cols();
}

int fc_out_dim(const Matrix& w, FcApply apply) {
  return apply == FcApply::kTransposed ? w.cols() : w.rows();
}

}  // namespace

ParamState make_param(Matrix weights, manifolds::ManifoldDescriptor manifold, int bias_len) {
  ParamState p;
  p.momentum = Matrix(weights.rows(), weights.cols());
  p.weights = std::move(weights);
  p.manifold = manifold;
  if (bias_len > 0) {
    p.bias = Matrix(bias_len, 1);
    p.bias_momentum = Matrix(bias_len, 1);
  }
  return p;
}

void validate_network(const NetworkSpec& net, const std::vector<ParamState>& params) {
  if (net.layers.empty()) throw UsageError("validate_network: empty layer list");
  int prev_out = net.layers.front().in_dim;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const LayerSpec& layer = net.layers[k];
    const std::string where = "layer " + std::to_string(k);
    if (layer.in_dim <= 0 || layer.out_dim <= 0) {
      throw DimensionError(where + ": nonpositive dimensions");
    }
    if (layer.in_dim != prev_out) {
      throw DimensionError(where + ": in_dim " + std::to_string(layer.in_dim) +
                           " does not chain with previous out_dim " +
                           std::to_string(prev_out));
    }
    prev_out = layer.out_dim;

    if (layer.kind == LayerKind::kActivation) {
      if (layer.in_dim != layer.out_dim) {
        throw DimensionError(where + ": activation layers preserve dimension");
      }
      continue;
    }
    if (layer.param < 0 || layer.param >= static_cast<int>(params.size())) {
      throw UsageError(where + ": parameter index " + std::to_string(layer.param) +
                       " out of range");
    }
    const ParamState& ps = params[layer.param];
    if (ps.manifold.n != ps.weights.rows() || ps.manifold.p != ps.weights.cols()) {
      throw DimensionError(where + ": manifold descriptor does not match weight shape");
    }
    if (layer.kind == LayerKind::kFullyConnected) {
      if (fc_in_dim(ps.weights, layer.apply) != layer.in_dim ||
          fc_out_dim(ps.weights, layer.apply) != layer.out_dim) {
        throw DimensionError(where + ": weight shape " + shape_string(ps.weights) +
                             " does not realize " + std::to_string(layer.in_dim) + " -> " +
                             std::to_string(layer.out_dim));
      }
    } else {  // DiagonalScale
      if (layer.in_dim != layer.out_dim) {
        throw DimensionError(where + ": diagonal scale needs in_dim == out_dim");
      }
      if (ps.weights.cols() != 1 || ps.weights.rows() != layer.in_dim) {
        throw DimensionError(where + ": diagonal scale weight must be (" +
                             std::to_string(layer.in_dim) + ", 1)");
      }
    }
    if (layer.has_bias && (!ps.has_bias() || ps.bias.rows() != layer.out_dim)) {
      throw DimensionError(where + ": bias of length " + std::to_string(layer.out_dim) +
                           " required");
    }
  }
}

int network_input_dim(const NetworkSpec& net) {
  if (net.layers.empty()) throw UsageError("network_input_dim: empty network");
  return net.layers.front().in_dim;
}

int network_output_dim(const NetworkSpec& net) {
  if (net.layers.empty()) throw UsageError("network_output_dim: empty network");
  return net.layers.back().out_dim;
}

Matrix fc_forward(const Matrix& w, const Matrix& bias, const Matrix& x, FcApply apply) {
  if (fc_in_dim(w, apply) != x.rows()) {
    throw DimensionError("fc_forward: weight " + shape_string(w) + " cannot consume input " +
                         shape_string(x));
  }
  Matrix out = apply == FcApply::kTransposed ? linalg::matmul(transpose(w), x)
                                             : linalg::matmul(w, x);
  if (!bias.empty()) {
    if (bias.rows() != out.rows() || bias.cols() != 1) {
      throw DimensionError("fc_forward: bias shape " + shape_string(bias) +
                           " does not match output rows " + std::to_string(out.rows()));
    }
    for (int i = 0; i < out.rows(); ++i)
      for (int b = 0; b < out.cols(); ++b) out(i, b) += bias(i, 0);
  }
  return out;
}

FcGrads fc_backward(const Matrix& w, const Matrix& x, const Matrix& upstream, FcApply apply,
                    bool want_bias) {
  if (fc_in_dim(w, apply) != x.rows() || fc_out_dim(w, apply) != upstream.rows() ||
      x.cols() != upstream.cols()) {
    throw DimensionError("fc_backward: inconsistent shapes w" + shape_string(w) + " x" +
                         shape_string(x) + " upstream" + shape_string(upstream));
  }
  const double inv_batch = 1.0 / x.cols();
  FcGrads out;
  if (apply == FcApply::kTransposed) {
    out.grad_w = inv_batch * linalg::matmul(x, transpose(upstream));
    out.grad_x = linalg::matmul(w, upstream);
  } else {
    out.grad_w = inv_batch * linalg::matmul(upstream, transpose(x));
    out.grad_x = linalg::matmul(transpose(w), upstream);
  }
  if (want_bias) out.grad_b = row_mean(upstream);
  return out;
}

Matrix activation_forward(ActivationKind kind, const Matrix& z) {
  Matrix out = z;
  switch (kind) {
    case ActivationKind::kIdentity:
      break;
    case ActivationKind::kSigmoid:
      for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) = 1.0 / (1.0 + std::exp(-z(i, j)));
      break;
    case ActivationKind::kTanh:
      for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) = std::tanh(z(i, j));
      break;
    case ActivationKind::kRelu:
      for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) = z(i, j) > 0.0 ? z(i, j) : 0.0;
      break;
  }
  return out;
}

Matrix activation_backward(ActivationKind kind, const Matrix& z, const Matrix& upstream) {
  check_same_shape(z, upstream, "activation_backward");
  Matrix out = upstream;
  switch (kind) {
    case ActivationKind::kIdentity:
      break;
    case ActivationKind::kSigmoid:
      for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) {
          const double s = 1.0 / (1.0 + std::exp(-z(i, j)));
          out(i, j) = upstream(i, j) * s * (1.0 - s);
        }
      break;
    case ActivationKind::kTanh:
      for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) {
          const double t = std::tanh(z(i, j));
          out(i, j) = upstream(i, j) * (1.0 - t * t);
        }
      break;
    case ActivationKind::kRelu:
      for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) = z(i, j) > 0.0 ? upstream(i, j) : 0.0;
      break;
  }
  return out;
}

LossResult mse_reconstruction_loss(const Matrix& x_hat, const Matrix& x) {
  check_same_shape(x_hat, x, "mse_reconstruction_loss");
  const double inv_batch = 1.0 / x.cols();
  LossResult out;
  out.grad = Matrix(x.rows(), x.cols());
  double total = 0.0;
  for (int i = 0; i < x.rows(); ++i) {
    for (int b = 0; b < x.cols(); ++b) {
      const double d = x_hat(i, b) - x(i, b);
      total += d * d;
      out.grad(i, b) = 2.0 * inv_batch * d;
    }
  }
  out.value = total * inv_batch;
  return out;
}

LossResult softmax_ce_loss(const Matrix& logits, const std::vector<int>& labels) {
  const int classes = logits.rows();
  const int batch = logits.cols();
  if (static_cast<int>(labels.size()) != batch) {
    throw DimensionError("softmax_ce_loss: got " + std::to_string(labels.size()) +
                         " labels for batch " + std::to_string(batch));
  }
  for (int b = 0; b < batch; ++b) {
    if (labels[b] < 0 || labels[b] >= classes) {
      throw InputError("softmax_ce_loss: label " + std::to_string(labels[b]) +
                       " out of range [0, " + std::to_string(classes) + ")");
    }
  }
  const double inv_batch = 1.0 / batch;
  LossResult out;
  out.grad = Matrix(classes, batch);
  double total = 0.0;
  for (int b = 0; b < batch; ++b) {
    double zmax = logits(0, b);
    for (int c = 1; c < classes; ++c) zmax = std::max(zmax, logits(c, b));
    double denom = 0.0;
    for (int c = 0; c < classes; ++c) denom += std::exp(logits(c, b) - zmax);
    const double log_denom = std::log(denom);
    total += -(logits(labels[b], b) - zmax - log_denom);
    for (int c = 0; c < classes; ++c) {
      const double p = std::exp(logits(c, b) - zmax) / denom;
      out.grad(c, b) = (p - (c == labels[b] ? 1.0 : 0.0)) * inv_batch;
    }
  }
  out.value = total * inv_batch;
  return out;
}

ForwardCache network_forward(const NetworkSpec& net, const std::vector<ParamState>& params,
                             const Matrix& x) {
  validate_network(net, params);
  if (x.rows() != network_input_dim(net)) {
    throw DimensionError("network_forward: input " + shape_string(x) +
                         " does not match network input dim " +
                         std::to_string(network_input_dim(net)));
  }
  ForwardCache cache;
  cache.batch = x.cols();
  cache.inputs.reserve(net.layers.size());
  Matrix current = x;
  for (const LayerSpec& layer : net.layers) {
    cache.inputs.push_back(current);
    switch (layer.kind) {
      case LayerKind::kFullyConnected: {
        const ParamState& ps = params[layer.param];
        current = fc_forward(ps.weights, layer.has_bias ? ps.bias : Matrix(), current,
                             layer.apply);
        break;
      }
      case LayerKind::kDiagonalScale: {
        const ParamState& ps = params[layer.param];
        Matrix next(current.rows(), current.cols());
        for (int i = 0; i < current.rows(); ++i) {
          const double wi = ps.weights(i, 0);
          const double bi = layer.has_bias ? ps.bias(i, 0) : 0.0;
          for (int b = 0; b < current.cols(); ++b) next(i, b) = wi * current(i, b) + bi;
        }
        current = std::move(next);
        break;
      }
      case LayerKind::kActivation:
        current = activation_forward(layer.activation, current);
        break;
    }
  }
  cache.output = std::move(current);
  return cache;
}

ParamGrads network_backward(const NetworkSpec& net, const std::vector<ParamState>& params,
                            const ForwardCache& cache, const Matrix& loss_grad) {
  if (cache.inputs.size() != net.layers.size()) {
    throw UsageError("network_backward: cache does not match the network (got " +
                     std::to_string(cache.inputs.size()) + " cached layers for " +
                     std::to_string(net.layers.size()) + ")");
  }
  if (!loss_grad.same_shape(cache.output)) {
    throw UsageError("network_backward: loss gradient " + shape_string(loss_grad) +
                     " does not match cached output " + shape_string(cache.output));
  }
  ParamGrads grads;
  grads.weights.reserve(params.size());
  grads.biases.reserve(params.size());
  for (const ParamState& ps : params) {
    grads.weights.emplace_back(ps.weights.rows(), ps.weights.cols());
    grads.biases.emplace_back(ps.has_bias() ? Matrix(ps.bias.rows(), 1) : Matrix());
  }

  Matrix g = loss_grad;
  for (int k = static_cast<int>(net.layers.size()) - 1; k >= 0; --k) {
    const LayerSpec& layer = net.layers[k];
    const Matrix& in = cache.inputs[k];
    if (in.cols() != g.cols()) {
      throw UsageError("network_backward: stale cache at layer " + std::to_string(k));
    }
    switch (layer.kind) {
      case LayerKind::kFullyConnected: {
        const ParamState& ps = params[layer.param];
        if (layer.apply == FcApply::kTransposed) {
          grads.weights[layer.param] += linalg::matmul(in, transpose(g));
          if (layer.has_bias) grads.biases[layer.param] += row_sum(g);
          g = linalg::matmul(ps.weights, g);
        } else {
          grads.weights[layer.param] += linalg::matmul(g, transpose(in));
          if (layer.has_bias) grads.biases[layer.param] += row_sum(g);
          g = linalg::matmul(transpose(ps.weights), g);
        }
        break;
      }
      case LayerKind::kDiagonalScale: {
        const ParamState& ps = params[layer.param];
        Matrix gw(ps.weights.rows(), 1);
        Matrix gx(in.rows(), in.cols());
        for (int i = 0; i < in.rows(); ++i) {
          double s = 0.0;
          const double wi = ps.weights(i, 0);
          for (int b = 0; b < in.cols(); ++b) {
            s += in(i, b) * g(i, b);
            gx(i, b) = wi * g(i, b);
          }
          gw(i, 0) = s;
        }
        grads.weights[layer.param] += gw;
        if (layer.has_bias) grads.biases[layer.param] += row_sum(g);
        g = std::move(gx);
        break;
      }
      case LayerKind::kActivation:
        g = activation_backward(layer.activation, in, g);
        break;
    }
  }
  return grads;
}

LossResult network_loss(const NetworkSpec& net, const Matrix& output, const Targets& targets) {
  switch (net.loss) {
    case LossKind::kMseReconstruction:
      return mse_reconstruction_loss(output, targets.dense);
    case LossKind::kSoftmaxCrossEntropy:
      return softmax_ce_loss(output, targets.labels);
  }
  throw UsageError("network_loss: unknown loss kind");
}

EvalResult network_loss_and_grads(const NetworkSpec& net, const std::vector<ParamState>& params,
                                  const Matrix& x, const Targets& targets) {
  ForwardCache cache = network_forward(net, params, x);
  LossResult loss = network_loss(net, cache.output, targets);
  EvalResult out;
  out.loss = loss.value;
  out.grads = network_backward(net, params, cache, loss.grad);
  out.output = std::move(cache.output);
  return out;
}

double finite_diff_check(const NetworkSpec& net, const std::vector<ParamState>& params,
                         const Matrix& x, const Targets& targets, double h) {
  if (h <= 0.0) throw InputError("finite_diff_check: h must be positive");
  std::vector<ParamState> work = params;
  const EvalResult base = network_loss_and_grads(net, work, x, targets);

  auto loss_at = [&]() {
    const ForwardCache cache = network_forward(net, work, x);
    return network_loss(net, cache.output, targets).value;
  };

  double max_rel = 0.0;
  auto probe = [&](Matrix& slot, const Matrix& bp_grad) {
    for (int i = 0; i < slot.rows(); ++i) {
      for (int j = 0; j < slot.cols(); ++j) {
        const double saved = slot(i, j);
        slot(i, j) = saved + h;
        const double up = loss_at();
        slot(i, j) = saved - h;
        const double down = loss_at();
        slot(i, j) = saved;
        const double fd = (up - down) / (2.0 * h);
        const double bp = bp_grad(i, j);
        const double rel =
            std::abs(fd - bp) / std::max({std::abs(fd), std::abs(bp), 1e-8});
        max_rel = std::max(max_rel, rel);
      }
    }
  };

  for (std::size_t pi = 0; pi < work.size(); ++pi) {
    probe(work[pi].weights, base.grads.weights[pi]);
    if (work[pi].has_bias()) probe(work[pi].bias, base.grads.biases[pi]);
  }
  return max_rel;
}

int append_noncompact_stiefel_layer(NetworkSpec& net, std::vector<ParamState>& params,
                                    int n, int p, ActivationKind activation,
                                    std::uint64_t seed) {
  if (p > n || p <= 0 || n <= 0) {
    throw DimensionError("append_noncompact_stiefel_layer: need 0 < p <= n, got (" +
                         std::to_string(n) + ", " + std::to_string(p) + ")");
  }
  const int first_layer = static_cast<int>(net.layers.size());
  const int w1_index = static_cast<int>(params.size());

  params.push_back(make_param(manifolds::random_point(manifolds::stiefel(n, p), seed),
                              manifolds::stiefel(n, p)));
  // Diagonal factor starts at one so every effective column norm is nonzero.
  ParamState diag = make_param(Matrix(p, 1), manifolds::euclidean(p, 1), p);
  for (int i = 0; i < p; ++i) diag.weights(i, 0) = 1.0;
  params.push_back(std::move(diag));

  LayerSpec fc;
  fc.kind = LayerKind::kFullyConnected;
  fc.in_dim = n;
  fc.out_dim = p;
  fc.param = w1_index;
  fc.apply = FcApply::kTransposed;
  fc.has_bias = false;
  net.layers.push_back(fc);

  LayerSpec scale;
  scale.kind = LayerKind::kDiagonalScale;
  scale.in_dim = p;
  scale.out_dim = p;
  scale.param = w1_index + 1;
  scale.has_bias = true;
  net.layers.push_back(scale);

  LayerSpec act;
  act.kind = LayerKind::kActivation;
  act.in_dim = p;
  act.out_dim = p;
  act.activation = activation;
  net.layers.push_back(act);

  return first_layer;
}

namespace {

LowRankFactors truncate_svd(const Matrix& w, int rank) {
  const linalg::SvdResult svd = linalg::thin_svd(w, rank);
  LowRankFactors out;
  out.u = svd.u;
  out.d = svd.singular_values;
  out.v = svd.v;
  out.rank = rank;
  return out;
}

}  // namespace

LowRankFactors factorize_fc_lowrank(const Matrix& w, double energy_percent) {
  if (energy_percent <= 0.0 || energy_percent > 100.0) {
    throw InputError("factorize_fc_lowrank: energy percent must lie in (0, 100]");
  }
  const int full = std::min(w.rows(), w.cols());
  const linalg::SvdResult svd = linalg::thin_svd(w, full);
  double total = 0.0;
  for (double s : svd.singular_values) total += s * s;
  const double want = (energy_percent / 100.0) * total;
  int rank = full;
  double cum = 0.0;
  for (int i = 0; i < full; ++i) {
    cum += svd.singular_values[i] * svd.singular_values[i];
    if (cum >= want) {
      rank = i + 1;
      break;
    }
  }
  return factorize_fc_lowrank_rank(w, rank);
}

LowRankFactors factorize_fc_lowrank_rank(const Matrix& w, int rank) {
  if (rank < 1 || rank > std::min(w.rows(), w.cols())) {
    throw InputError("factorize_fc_lowrank_rank: rank " + std::to_string(rank) +
                     " out of range for " + shape_string(w));
  }
  return truncate_svd(w, rank);
}

long long lowrank_param_count(int n1, int n2, int p) {
  return static_cast<long long>(n1 + n2 - p + 2) * p;
}

void replace_fc_with_lowrank(NetworkSpec& net, std::vector<ParamState>& params,
                             int layer_index, const LowRankFactors& factors) {
  if (layer_index < 0 || layer_index >= static_cast<int>(net.layers.size())) {
    throw UsageError("replace_fc_with_lowrank: layer index out of range");
  }
  LayerSpec original = net.layers[layer_index];
  if (original.kind != LayerKind::kFullyConnected) {
    throw UsageError("replace_fc_with_lowrank: layer " + std::to_string(layer_index) +
                     " is not fully connected");
  }
  int shared_uses = 0;
  for (const LayerSpec& layer : net.layers) {
    if (layer.param == original.param) ++shared_uses;
  }
  if (shared_uses > 1) {
    throw UsageError("replace_fc_with_lowrank: parameter is shared between layers");
  }

  const ParamState old_param = params[original.param];
  const int p = factors.rank;
  // Stored weight M realizes M^T x (or M x); M = U D V^T either way, so the
  // factored stack applies U^T (or V^T), then D, then V (or U).
  const Matrix& first_w = original.apply == FcApply::kTransposed ? factors.u : factors.v;
  const Matrix& last_w = original.apply == FcApply::kTransposed ? factors.v : factors.u;

  // Drop the old parameter and shift the indices above it.
  params.erase(params.begin() + original.param);
  for (LayerSpec& layer : net.layers) {
    if (layer.param > original.param) --layer.param;
  }

  const int base = static_cast<int>(params.size());
  params.push_back(make_param(first_w, manifolds::stiefel(first_w.rows(), p)));
  ParamState diag = make_param(Matrix(p, 1), manifolds::euclidean(p, 1));
  for (int i = 0; i < p; ++i) diag.weights(i, 0) = factors.d[i];
  params.push_back(std::move(diag));
  ParamState last = make_param(last_w, manifolds::stiefel(last_w.rows(), p),
                               original.has_bias ? original.out_dim : 0);
  if (original.has_bias) last.bias = old_param.bias;
  params.push_back(std::move(last));

  LayerSpec analyze;
  analyze.kind = LayerKind::kFullyConnected;
  analyze.in_dim = original.in_dim;
  analyze.out_dim = p;
  analyze.param = base;
  analyze.apply = FcApply::kTransposed;
  analyze.has_bias = false;

  LayerSpec scale;
  scale.kind = LayerKind::kDiagonalScale;
  scale.in_dim = p;
  scale.out_dim = p;
  scale.param = base + 1;
  scale.has_bias = false;

  LayerSpec synthesize;
  synthesize.kind = LayerKind::kFullyConnected;
  synthesize.in_dim = p;
  synthesize.out_dim = original.out_dim;
  synthesize.param = base + 2;
  synthesize.apply = FcApply::kPlain;
  synthesize.has_bias = original.has_bias;

  net.layers.erase(net.layers.begin() + layer_index);
  net.layers.insert(net.layers.begin() + layer_index, {analyze, scale, synthesize});
  validate_network(net, params);
}

long long network_param_count(const NetworkSpec& net, const std::vector<ParamState>& params) {
  validate_network(net, params);
  long long count = 0;
  for (const ParamState& ps : params) {
    count += static_cast<long long>(ps.weights.size());
    count += static_cast<long long>(ps.bias.size());
  }
  return count;
}

}  // namespace gbp::nn
