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

#include "gbp/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gbp/rng.hpp"

namespace gbp::optim {

namespace {

constexpr std::uint64_t kShuffleStream = 0xA11CEULL;
constexpr std::uint64_t kNoiseStream = 0x90153ULL;

Matrix gather_columns(const Matrix& x, const std::vector<int>& order, int begin, int end) {
  Matrix out(x.rows(), end - begin);
  for (int b = begin; b < end; ++b) {
    const int src = order[b];
    for (int i = 0; i < x.rows(); ++i) out(i, b - begin) = x(i, src);
  }
  return out;
}

bool is_constrained(const nn::ParamState& ps) {
  return ps.manifold.kind != manifolds::ManifoldKind::kEuclidean;
}

}  // namespace

void validate_optimizer_config(const OptimizerConfig& config) {
  if (config.lr_start < 0.0 || config.lr_end < 0.0) {
    throw ConfigError("optimizer: learning rates must be nonnegative");
  }
  if (config.lr_end > config.lr_start) {
    throw ConfigError("optimizer: lr_end must not exceed lr_start");
  }
  if (config.momentum < 0.0 || config.momentum > 1.0) {
    throw ConfigError("optimizer: momentum must lie in [0, 1]");
  }
  if (config.weight_decay < 0.0) {
    throw ConfigError("optimizer: weight_decay must be nonnegative");
  }
  if (config.epochs <= 0) throw ConfigError("optimizer: epochs must be positive");
  if (config.batch_size <= 0) throw ConfigError("optimizer: batch_size must be positive");
}

double lr_at(const OptimizerConfig& config, int epoch) {
  if (epoch < 0 || epoch >= config.epochs) {
    throw UsageError("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                     std::to_string(config.epochs) + ")");
  }
  if (config.schedule == LrSchedule::kConstant || config.epochs == 1 ||
      config.lr_start == 0.0) {
    return config.lr_start;
  }
  const double frac = static_cast<double>(epoch) / (config.epochs - 1);
  if (config.schedule == LrSchedule::kLogLinear) {
    return config.lr_start * std::pow(config.lr_end / config.lr_start, frac);
  }
  return config.lr_start + (config.lr_end - config.lr_start) * frac;
}

StepResult bp_step(const Matrix& w, const Matrix& grad, double eta, double mu,
                   const Matrix& theta) {
  check_same_shape(w, grad, "bp_step");
  StepResult out;
  if (mu == 0.0) {
    out.momentum = (-eta) * grad;
  } else {
    check_same_shape(w, theta, "bp_step");
    out.momentum = mu * theta - eta * grad;
  }
  out.w = w + out.momentum;
  return out;
}

Matrix gbp_step_simple(const manifolds::ManifoldDescriptor& m, const Matrix& w,
                       const Matrix& grad, double eta) {
  if (eta == 0.0) return w;  // a retraction fixes the base point exactly
  const Matrix xi = (-eta) * manifolds::tangent_project(m, w, grad);
  return manifolds::retract(m, w, xi);
}

StepResult gbp_step(const manifolds::ManifoldDescriptor& m, const Matrix& w,
                    const Matrix& grad, double eta, double mu, const Matrix& theta) {
  check_same_shape(w, grad, "gbp_step");
  StepResult out;
  if (eta == 0.0 && mu == 0.0) {
    out.momentum = Matrix(w.rows(), w.cols());
    out.w = w;
    return out;
  }
  if (mu == 0.0) {
    // Momentum-free form, kept operation-for-operation identical to
    // gbp_step_simple so the mu = 0 reduction holds bitwise.
    out.momentum = (-eta) * grad;
    const Matrix xi = (-eta) * manifolds::tangent_project(m, w, grad);
    out.w = manifolds::retract(m, w, xi);
    return out;
  }
  check_same_shape(w, theta, "gbp_step");
  out.momentum = mu * theta - eta * grad;
  const Matrix xi = manifolds::tangent_project(m, w, out.momentum);
  out.w = manifolds::retract(m, w, xi);
  return out;
}

StepResult pgd_step(const manifolds::ManifoldDescriptor& m, const Matrix& w,
                    const Matrix& grad, double eta, double mu, const Matrix& theta) {
  check_same_shape(w, grad, "pgd_step");
  StepResult out;
  if (eta == 0.0 && mu == 0.0) {
    out.momentum = Matrix(w.rows(), w.cols());
    out.w = w;
    return out;
  }
  if (mu == 0.0) {
    out.momentum = (-eta) * grad;
  } else {
    check_same_shape(w, theta, "pgd_step");
    out.momentum = mu * theta - eta * grad;
  }
  out.w = manifolds::metric_project(m, w + out.momentum);
  return out;
}

double max_feasibility_defect(const std::vector<nn::ParamState>& params) {
  double defect = 0.0;
  for (const nn::ParamState& ps : params) {
    if (is_constrained(ps)) {
      defect = std::max(defect,
                        manifolds::check_feasible(ps.manifold, ps.weights).defect);
    }
  }
  return defect;
}

std::vector<MetricsRecord> train(const nn::NetworkSpec& net, std::vector<nn::ParamState>& params,
                                 const Dataset& data, const OptimizerConfig& config,
                                 const TrainHooks& hooks) {
  validate_optimizer_config(config);
  nn::validate_network(net, params);
  if (data.x.empty()) throw InputError("train: dataset is empty");
  const int n_samples = data.x.cols();
  const bool classification = net.loss == nn::LossKind::kSoftmaxCrossEntropy;
  if (classification && static_cast<int>(data.labels.size()) != n_samples) {
    throw InputError("train: labels do not cover the dataset");
  }
  if (!classification && !data.targets.same_shape(data.x) &&
      data.targets.rows() != nn::network_output_dim(net)) {
    throw InputError("train: reconstruction targets have unexpected shape");
  }
  if (!hooks.input_noise_std.empty() &&
      static_cast<int>(hooks.input_noise_std.size()) != data.x.rows()) {
    throw InputError("train: input noise vector does not match feature count");
  }

  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
  Rng noise_rng(derive_seed(config.seed, kNoiseStream));
  std::vector<int> order(n_samples);
  std::iota(order.begin(), order.end(), 0);

  std::vector<MetricsRecord> records;
  records.reserve(config.epochs);
  long long global_step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double eta = lr_at(config, epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

    double loss_sum = 0.0;
    long long correct = 0;

    for (int begin = 0; begin < n_samples; begin += config.batch_size) {
      const int end = std::min(begin + config.batch_size, n_samples);
      Matrix xb = gather_columns(data.x, order, begin, end);
      nn::Targets targets;
      if (classification) {
        targets.labels.resize(end - begin);
        for (int b = begin; b < end; ++b) targets.labels[b - begin] = data.labels[order[b]];
      } else {
        targets.dense = gather_columns(data.targets, order, begin, end);
      }
      if (!hooks.input_noise_std.empty()) {
        for (int i = 0; i < xb.rows(); ++i) {
          const double sd = hooks.input_noise_std[i];
          for (int b = 0; b < xb.cols(); ++b) xb(i, b) += sd * noise_rng.normal();
        }
      }

      const nn::EvalResult eval = nn::network_loss_and_grads(net, params, xb, targets);
      if (!std::isfinite(eval.loss)) {
        throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch),
                              epoch);
      }
      loss_sum += eval.loss * (end - begin);
      if (classification) {
        for (int b = 0; b < eval.output.cols(); ++b) {
          int arg = 0;
          for (int c = 1; c < eval.output.rows(); ++c) {
            if (eval.output(c, b) > eval.output(arg, b)) arg = c;
          }
          if (arg == targets.labels[b]) ++correct;
        }
      }

      ++global_step;
      for (std::size_t pi = 0; pi < params.size(); ++pi) {
        nn::ParamState& ps = params[pi];
        const bool constrained = is_constrained(ps);
        Matrix grad_w = eval.grads.weights[pi];
        // Weight decay only where it has feasible directions to act on.
        if (!constrained && config.weight_decay > 0.0) {
          grad_w += config.weight_decay * ps.weights;
        }

        StepResult step;
        if (!constrained || config.method == Method::kBp) {
          step = bp_step(ps.weights, grad_w, eta, config.momentum, ps.momentum);
        } else if (config.method == Method::kGbp) {
          step = gbp_step(ps.manifold, ps.weights, grad_w, eta, config.momentum,
                          ps.momentum);
        } else {
          step = pgd_step(ps.manifold, ps.weights, grad_w, eta, config.momentum,
                          ps.momentum);
        }
        ps.weights = std::move(step.w);
        ps.momentum = std::move(step.momentum);

        if (constrained && config.method != Method::kBp) {
          const auto feas = manifolds::check_feasible(ps.manifold, ps.weights);
          if (!feas.ok) {
            throw FeasibilityError("train: parameter " + std::to_string(pi) +
                                   " drifted off its manifold, defect " +
                                   std::to_string(feas.defect));
          }
          if (global_step % kRefeasibilizePeriod == 0) {
            ps.weights = manifolds::refeasibilize(ps.manifold, ps.weights);
          }
        }

        if (ps.has_bias()) {
          Matrix grad_b = eval.grads.biases[pi];
          if (config.weight_decay > 0.0) grad_b += config.weight_decay * ps.bias;
          StepResult bias_step =
              bp_step(ps.bias, grad_b, eta, config.momentum, ps.bias_momentum);
          ps.bias = std::move(bias_step.w);
          ps.bias_momentum = std::move(bias_step.momentum);
        }
      }
    }

    MetricsRecord record;
    record.epoch = epoch;
    record.loss = loss_sum / n_samples;
    record.feasibility_defect = max_feasibility_defect(params);
    record.lr = eta;
    if (classification) {
      record.accuracy = static_cast<double>(correct) / n_samples;
    }
    records.push_back(record);
    if (hooks.on_epoch) hooks.on_epoch(record);
  }
  return records;
}

}  // namespace gbp::optim
