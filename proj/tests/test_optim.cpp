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

#include <doctest.h>

#include "gbp/experiments.hpp"
#include "gbp/optim.hpp"
#include "test_support.hpp"

using namespace gbp;
using namespace gbp::optim;
using gbp::test::random_matrix;
using gbp::test::random_stiefel;

namespace {

// Reconstruction objective E(W) = (1/N) sum_i ||x_i - W W^T x_i||^2 and its
// gradient through the shared-weight network.
struct QuadraticObjective {
  nn::NetworkSpec net;
  Matrix x;

  explicit QuadraticObjective(int n, int p, int samples, std::uint64_t seed) {
    net.loss = nn::LossKind::kMseReconstruction;
    nn::LayerSpec enc;
    enc.kind = nn::LayerKind::kFullyConnected;
    enc.in_dim = n;
    enc.out_dim = p;
    enc.param = 0;
    net.layers.push_back(enc);
    nn::LayerSpec dec;
    dec.kind = nn::LayerKind::kFullyConnected;
    dec.in_dim = p;
    dec.out_dim = n;
    dec.param = 0;
    dec.apply = nn::FcApply::kPlain;
    net.layers.push_back(dec);
    x = random_matrix(n, samples, seed);
  }

  double loss(const Matrix& w) const {
    std::vector<nn::ParamState> params{nn::make_param(w, manifolds::stiefel(w.rows(), w.cols()))};
    const nn::ForwardCache cache = nn::network_forward(net, params, x);
    return nn::mse_reconstruction_loss(cache.output, x).value;
  }

  Matrix grad(const Matrix& w) const {
    std::vector<nn::ParamState> params{nn::make_param(w, manifolds::stiefel(w.rows(), w.cols()))};
    nn::Targets targets;
    targets.dense = x;
    return nn::network_loss_and_grads(net, params, x, targets).grads.weights[0];
  }
};

}  // namespace

TEST_SUITE_BEGIN("optim");

TEST_CASE("lr_at endpoints and interpolation") {
  OptimizerConfig config;
  config.lr_start = 0.1;
  config.lr_end = 0.001;
  config.schedule = LrSchedule::kLogLinear;
  config.epochs = 11;
  CHECK(lr_at(config, 0) == 0.1);
  CHECK(lr_at(config, 10) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(lr_at(config, 5) == doctest::Approx(0.01).epsilon(1e-12));  // geometric mean

  config.schedule = LrSchedule::kLinear;
  CHECK(lr_at(config, 0) == 0.1);
  CHECK(lr_at(config, 10) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(lr_at(config, 5) == doctest::Approx((0.1 + 0.001) / 2).epsilon(1e-12));

  config.schedule = LrSchedule::kConstant;
  CHECK(lr_at(config, 7) == 0.1);

  CHECK_THROWS_AS(lr_at(config, 11), UsageError);
  CHECK_THROWS_AS(lr_at(config, -1), UsageError);
}

TEST_CASE("bp_step basics and the two-step momentum expansion") {
  const Matrix w = random_matrix(3, 2, 40);
  const StepResult still = bp_step(w, Matrix(3, 2), 0.1, 0.0, Matrix(3, 2));
  CHECK(still.w == w);

  const Matrix ws = Matrix::from_rows({{1.0}});
  const Matrix gs = Matrix::from_rows({{2.0}});
  CHECK(bp_step(ws, gs, 0.1, 0.0, Matrix(1, 1)).w(0, 0) == doctest::Approx(0.8));

  // Two steps with momentum reproduce theta(2) = -mu*eta*g1 - eta*g2.
  // Dyadic values keep the arithmetic exact.
  const double eta = 0.25, mu = 0.5;
  const Matrix g1 = Matrix::from_rows({{1.0}});
  const Matrix g2 = Matrix::from_rows({{2.0}});
  StepResult s1 = bp_step(ws, g1, eta, mu, Matrix(1, 1));
  StepResult s2 = bp_step(s1.w, g2, eta, mu, s1.momentum);
  CHECK(s2.momentum(0, 0) == -mu * eta * g1(0, 0) - eta * g2(0, 0));
}

TEST_CASE("gbp_step with euclidean descriptors is bitwise bp_step") {
  const manifolds::ManifoldDescriptor m = manifolds::euclidean(4, 3);
  Matrix w_bp = random_matrix(4, 3, 41);
  Matrix w_gbp = w_bp;
  Matrix theta_bp(4, 3), theta_gbp(4, 3);
  for (int step = 0; step < 25; ++step) {
    const Matrix g = random_matrix(4, 3, 4200 + step);
    for (double mu : {0.0, 0.9}) {
      const StepResult a = bp_step(w_bp, g, 0.05, mu, theta_bp);
      const StepResult b = gbp_step(m, w_gbp, g, 0.05, mu, theta_gbp);
      CHECK(a.w == b.w);
      CHECK(a.momentum == b.momentum);
      if (mu > 0.0) {
        w_bp = a.w;
        w_gbp = b.w;
        theta_bp = a.momentum;
        theta_gbp = b.momentum;
      }
    }
  }
}

TEST_CASE("gbp_step with mu = 0 equals the momentum-free update bitwise") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const manifolds::ManifoldDescriptor m = manifolds::stiefel(7, 3);
    const Matrix w = random_stiefel(7, 3, seed);
    const Matrix g = random_matrix(7, 3, 900 + seed);
    const Matrix theta = random_matrix(7, 3, 1900 + seed);  // must be ignored at mu = 0
    const StepResult step = gbp_step(m, w, g, 0.01, 0.0, theta);
    CHECK(step.w == gbp_step_simple(m, w, g, 0.01));
  }
}

TEST_CASE("gbp_step ignores normal-space gradients") {
  const manifolds::ManifoldDescriptor m = manifolds::stiefel(6, 3);
  const Matrix w = random_stiefel(6, 3, 43);
  const Matrix s = linalg::sym(random_matrix(3, 3, 44));
  const Matrix g = linalg::matmul(w, s);  // gradient in the normal space
  const StepResult step = gbp_step(m, w, g, 0.05, 0.0, Matrix(6, 3));
  CHECK(max_abs_diff(step.w, w) < 1e-12);
}

TEST_CASE("gbp_step stays feasible and decreases the quadratic objective") {
  const QuadraticObjective objective(8, 3, 50, 45);
  const manifolds::ManifoldDescriptor m = manifolds::stiefel(8, 3);
  const Matrix w = random_stiefel(8, 3, 46);
  const Matrix g = objective.grad(w);
  const StepResult step = gbp_step(m, w, g, 0.01, 0.0, Matrix(8, 3));
  CHECK(manifolds::check_feasible(m, step.w, 1e-10).ok);
  CHECK(objective.loss(step.w) < objective.loss(w));
}

TEST_CASE("local descent: small enough gbp steps never increase the loss") {
  // Halve eta starting from 1e-2 until the step is non-increasing.
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const QuadraticObjective objective(6, 2, 30, 4600 + trial);
    const manifolds::ManifoldDescriptor m = manifolds::stiefel(6, 2);
    const Matrix w = random_stiefel(6, 2, 4700 + trial);
    const double base = objective.loss(w);
    const Matrix g = objective.grad(w);
    double eta = 1e-2;
    bool descended = false;
    for (int halving = 0; halving < 40; ++halving) {
      const StepResult step = gbp_step(m, w, g, eta, 0.0, Matrix(6, 2));
      if (objective.loss(step.w) <= base) {
        descended = true;
        break;
      }
      eta *= 0.5;
    }
    CHECK(descended);
  }
}

TEST_CASE("projected momentum is tangent at the current point") {
  const manifolds::ManifoldDescriptor m = manifolds::stiefel(9, 4);
  Matrix w = random_stiefel(9, 4, 48);
  Matrix theta(9, 4);
  for (int step = 0; step < 30; ++step) {
    const Matrix g = random_matrix(9, 4, 4900 + step);
    const StepResult next = gbp_step(m, w, g, 0.02, 0.9, theta);
    const Matrix xi = manifolds::tangent_project(m, w, next.momentum);
    const Matrix wt = linalg::matmul(transpose(w), xi);
    CHECK(frobenius_norm(wt + transpose(wt)) < 1e-10);
    w = next.w;
    theta = next.momentum;
  }
}

TEST_CASE("pgd_step fixes feasible points under zero gradients") {
  const manifolds::ManifoldDescriptor m = manifolds::stiefel(6, 2);
  const Matrix w = random_stiefel(6, 2, 50);
  const StepResult step = pgd_step(m, w, Matrix(6, 2), 0.1, 0.0, Matrix(6, 2));
  CHECK(max_abs_diff(step.w, w) < 1e-10);
}

TEST_CASE("pgd_step: normal-space gradients move O(eta^2), euclidean step O(eta)") {
  const manifolds::ManifoldDescriptor m = manifolds::stiefel(8, 3);
  const Matrix w = random_stiefel(8, 3, 51);
  const Matrix s = linalg::sym(random_matrix(3, 3, 52, 0.5));
  const Matrix g = linalg::matmul(w, s);
  for (double eta : {1e-2, 1e-3}) {
    const StepResult step = pgd_step(m, w, g, eta, 0.0, Matrix(8, 3));
    const double pgd_move = frobenius_norm(step.w - w);
    const double euclidean_move = eta * frobenius_norm(g);
    CHECK(pgd_move < eta * eta * 10.0);
    CHECK(pgd_move < 0.01 * euclidean_move);
    CHECK(manifolds::check_feasible(m, step.w, 1e-10).ok);
  }
}

TEST_CASE("pgd_step output is always feasible") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const manifolds::ManifoldDescriptor m = manifolds::stiefel(7, 3);
    const Matrix w = random_stiefel(7, 3, seed);
    const Matrix g = random_matrix(7, 3, 5300 + seed);
    const StepResult step = pgd_step(m, w, g, 0.05, 0.5, random_matrix(7, 3, 5400 + seed, 0.01));
    CHECK(manifolds::check_feasible(m, step.w, 1e-10).ok);
  }
}

TEST_CASE("train with zero learning rate leaves parameters unchanged") {
  expt::ExperimentConfig cfg = expt::default_config(expt::ExperimentKind::kPcaRecovery);
  const Matrix x = expt::gen_gaussian_data(8, 60, std::vector<double>(8, 1.0), 60);

  nn::NetworkSpec net;
  net.loss = nn::LossKind::kMseReconstruction;
  nn::LayerSpec enc;
  enc.kind = nn::LayerKind::kFullyConnected;
  enc.in_dim = 8;
  enc.out_dim = 3;
  enc.param = 0;
  net.layers.push_back(enc);
  nn::LayerSpec dec;
  dec.kind = nn::LayerKind::kFullyConnected;
  dec.in_dim = 3;
  dec.out_dim = 8;
  dec.param = 0;
  dec.apply = nn::FcApply::kPlain;
  net.layers.push_back(dec);

  const Matrix w0 = random_stiefel(8, 3, 61);
  std::vector<nn::ParamState> params{nn::make_param(w0, manifolds::stiefel(8, 3))};

  OptimizerConfig opt = cfg.optimizer;
  opt.lr_start = 0.0;
  opt.lr_end = 0.0;
  opt.schedule = LrSchedule::kConstant;
  opt.epochs = 4;
  opt.batch_size = 20;

  Dataset data;
  data.x = x;
  data.targets = x;
  const auto records = train(net, params, data, opt);
  CHECK(params[0].weights == w0);
  // The per-epoch shuffle reorders the loss summation, so "constant" holds
  // to reassociation accuracy, not bitwise.
  for (const MetricsRecord& r : records) {
    CHECK(r.loss == doctest::Approx(records.front().loss).epsilon(1e-12));
  }
}

TEST_CASE("train reaches the trailing-eigenvalue optimum on a stiefel layer") {
  const int n = 8, p = 2, samples = 400;
  std::vector<double> spectrum = {6.0, 5.0, 1.0, 0.8, 0.6, 0.5, 0.4, 0.3};
  const Matrix x = expt::gen_gaussian_data(n, samples, spectrum, 62);

  const Matrix covariance = (1.0 / samples) * linalg::matmul(x, transpose(x));
  const linalg::EighResult eig = linalg::jacobi_eigh(covariance);
  double optimum = 0.0;
  for (int i = p; i < n; ++i) optimum += eig.eigenvalues[i];

  nn::NetworkSpec net;
  net.loss = nn::LossKind::kMseReconstruction;
  nn::LayerSpec enc;
  enc.kind = nn::LayerKind::kFullyConnected;
  enc.in_dim = n;
  enc.out_dim = p;
  enc.param = 0;
  net.layers.push_back(enc);
  nn::LayerSpec dec;
  dec.kind = nn::LayerKind::kFullyConnected;
  dec.in_dim = p;
  dec.out_dim = n;
  dec.param = 0;
  dec.apply = nn::FcApply::kPlain;
  net.layers.push_back(dec);
  std::vector<nn::ParamState> params{
      nn::make_param(random_stiefel(n, p, 63), manifolds::stiefel(n, p))};

  OptimizerConfig opt;
  opt.method = Method::kGbp;
  opt.lr_start = 0.05;
  opt.lr_end = 0.002;
  opt.schedule = LrSchedule::kLogLinear;
  opt.epochs = 80;
  opt.batch_size = 50;
  opt.seed = 64;

  Dataset data;
  data.x = x;
  data.targets = x;
  const auto records = train(net, params, data, opt);
  CHECK(records.back().loss < optimum * 1.05);
  CHECK(records.back().loss > optimum * 0.95);
  CHECK(records.back().feasibility_defect < 1e-8);
}

TEST_CASE("train is deterministic for identical seeds") {
  auto run_once = [] {
    const Matrix x = expt::gen_gaussian_data(6, 80, std::vector<double>(6, 2.0), 65);
    nn::NetworkSpec net;
    net.loss = nn::LossKind::kMseReconstruction;
    nn::LayerSpec enc;
    enc.kind = nn::LayerKind::kFullyConnected;
    enc.in_dim = 6;
    enc.out_dim = 2;
    enc.param = 0;
    net.layers.push_back(enc);
    nn::LayerSpec dec;
    dec.kind = nn::LayerKind::kFullyConnected;
    dec.in_dim = 2;
    dec.out_dim = 6;
    dec.param = 0;
    dec.apply = nn::FcApply::kPlain;
    net.layers.push_back(dec);
    std::vector<nn::ParamState> params{
        nn::make_param(random_stiefel(6, 2, 66), manifolds::stiefel(6, 2))};
    OptimizerConfig opt;
    opt.method = Method::kGbp;
    opt.lr_start = 0.05;
    opt.lr_end = 0.01;
    opt.epochs = 10;
    opt.batch_size = 16;
    opt.seed = 67;
    Dataset data;
    data.x = x;
    data.targets = x;
    return train(net, params, data, opt);
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("train aborts with a divergence error on exploding losses") {
  const Matrix x = random_matrix(4, 40, 68);
  nn::NetworkSpec net;
  net.loss = nn::LossKind::kMseReconstruction;
  nn::LayerSpec fc;
  fc.kind = nn::LayerKind::kFullyConnected;
  fc.in_dim = 4;
  fc.out_dim = 4;
  fc.param = 0;
  net.layers.push_back(fc);
  std::vector<nn::ParamState> params{
      nn::make_param(random_matrix(4, 4, 69), manifolds::euclidean(4, 4))};

  OptimizerConfig opt;
  opt.method = Method::kBp;
  opt.lr_start = 1e6;
  opt.lr_end = 1e6;
  opt.schedule = LrSchedule::kConstant;
  opt.epochs = 50;
  opt.batch_size = 10;

  Dataset data;
  data.x = x;
  data.targets = 5.0 * x;
  CHECK_THROWS_AS(train(net, params, data, opt), DivergenceError);
  try {
    std::vector<nn::ParamState> again{
        nn::make_param(random_matrix(4, 4, 69), manifolds::euclidean(4, 4))};
    train(net, again, data, opt);
  } catch (const DivergenceError& e) {
    CHECK(e.epoch >= 0);
  }
}

TEST_CASE("weight decay does not touch constrained weights") {
  const Matrix x = expt::gen_gaussian_data(6, 60, std::vector<double>(6, 1.5), 70);
  auto run_with_decay = [&x](double decay) {
    nn::NetworkSpec net;
    net.loss = nn::LossKind::kMseReconstruction;
    nn::LayerSpec enc;
    enc.kind = nn::LayerKind::kFullyConnected;
    enc.in_dim = 6;
    enc.out_dim = 2;
    enc.param = 0;
    net.layers.push_back(enc);
    nn::LayerSpec dec;
    dec.kind = nn::LayerKind::kFullyConnected;
    dec.in_dim = 2;
    dec.out_dim = 6;
    dec.param = 0;
    dec.apply = nn::FcApply::kPlain;
    net.layers.push_back(dec);
    std::vector<nn::ParamState> params{
        nn::make_param(random_stiefel(6, 2, 71), manifolds::stiefel(6, 2))};
    OptimizerConfig opt;
    opt.method = Method::kGbp;
    opt.lr_start = 0.05;
    opt.lr_end = 0.01;
    opt.epochs = 5;
    opt.batch_size = 15;
    opt.seed = 72;
    opt.weight_decay = decay;
    Dataset data;
    data.x = x;
    data.targets = x;
    train(net, params, data, opt);
    return params[0].weights;
  };
  CHECK(run_with_decay(0.0) == run_with_decay(0.25));
}

TEST_CASE("epoch callback receives every record") {
  const Matrix x = random_matrix(5, 30, 73);
  nn::NetworkSpec net;
  net.loss = nn::LossKind::kMseReconstruction;
  nn::LayerSpec fc;
  fc.kind = nn::LayerKind::kFullyConnected;
  fc.in_dim = 5;
  fc.out_dim = 5;
  fc.param = 0;
  net.layers.push_back(fc);
  std::vector<nn::ParamState> params{
      nn::make_param(random_matrix(5, 5, 74, 0.3), manifolds::euclidean(5, 5))};

  OptimizerConfig opt;
  opt.method = Method::kBp;
  opt.lr_start = 0.01;
  opt.lr_end = 0.001;
  opt.epochs = 6;
  opt.batch_size = 10;

  Dataset data;
  data.x = x;
  data.targets = x;
  std::vector<MetricsRecord> seen;
  TrainHooks hooks;
  hooks.on_epoch = [&seen](const MetricsRecord& r) { seen.push_back(r); };
  const auto records = train(net, params, data, opt, hooks);
  CHECK(seen == records);
  for (std::size_t i = 1; i < records.size(); ++i) {
    CHECK(records[i].epoch == records[i - 1].epoch + 1);
  }
}

TEST_SUITE_END();
