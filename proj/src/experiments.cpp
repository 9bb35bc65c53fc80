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

#include "gbp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gbp/linalg.hpp"
#include "gbp/rng.hpp"
#include "gbp/snapshot.hpp"

namespace gbp::expt {

namespace {

constexpr std::uint64_t kDataStream = 0xDA7AULL;
constexpr std::uint64_t kInitStream = 0x1417ULL;
constexpr std::uint64_t kSplitStream = 0x591117ULL;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SummaryWriter {
  std::string body = "metric,value\n";
  void add(const std::string& key, double value) {
    body += key + "," + format_real(value) + "\n";
  }
  void add(const std::string& key, long long value) {
    body += key + "," + std::to_string(value) + "\n";
  }
  void add(const std::string& key, const std::string& value) {
    body += key + "," + value + "\n";
  }
  void write(const std::string& path) const {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    file << body;
    if (!file) throw IoError("write to '" + path + "' failed");
  }
};

std::string prepare_output_dir(const ExperimentConfig& config) {
  if (config.output_dir.empty()) return "";
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + config.output_dir +
                  "': " + ec.message());
  }
  return config.output_dir;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

struct Split {
  optim::Dataset train;
  optim::Dataset test;  // empty x when test_fraction is 0
};

Split split_dataset(const MixtureData& data, double test_fraction, std::uint64_t seed,
                    bool reconstruction_targets) {
  const int total = data.x.cols();
  const int n_test = static_cast<int>(std::lround(test_fraction * total));
  if (n_test >= total) throw InputError("split: no training samples left");

  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng.engine());

  auto take = [&](int begin, int end) {
    optim::Dataset d;
    if (end <= begin) return d;
    d.x = Matrix(data.x.rows(), end - begin);
    for (int b = begin; b < end; ++b)
      for (int i = 0; i < data.x.rows(); ++i) d.x(i, b - begin) = data.x(i, order[b]);
    if (!data.labels.empty()) {
      d.labels.resize(end - begin);
      for (int b = begin; b < end; ++b) d.labels[b - begin] = data.labels[order[b]];
    }
    if (reconstruction_targets) d.targets = d.x;
    return d;
  };

  Split split;
  split.train = take(0, total - n_test);
  split.test = take(total - n_test, total);
  return split;
}

MixtureData load_dataset(const ExperimentConfig& config, bool want_labels) {
  const std::uint64_t data_seed = derive_seed(config.optimizer.seed, kDataStream);
  switch (config.data.source) {
    case DataSource::kSyntheticGaussian: {
      MixtureData out;
      out.x = gen_gaussian_data(config.data.n, config.data.samples, config.data.spectrum,
                                data_seed);
      return out;
    }
    case DataSource::kSyntheticMixture:
      return gen_gaussian_mixture(config.data.n, config.data.samples, config.data.classes,
                                  config.data.class_separation, data_seed);
    case DataSource::kCsvFile: {
      MixtureData out = load_csv_data(config.data.csv_path, want_labels);
      if (out.x.rows() != config.data.n) {
        throw ConfigError("[data]: n = " + std::to_string(config.data.n) +
                          " does not match csv feature count " +
                          std::to_string(out.x.rows()));
      }
      return out;
    }
  }
  throw UsageError("load_dataset: unknown source");
}

struct Evaluation {
  double loss = 0.0;
  std::optional<double> accuracy;
};

Evaluation evaluate(const nn::NetworkSpec& net, const std::vector<nn::ParamState>& params,
                    const optim::Dataset& data) {
  Evaluation out;
  if (data.x.empty()) return out;
  const nn::ForwardCache cache = nn::network_forward(net, params, data.x);
  if (net.loss == nn::LossKind::kSoftmaxCrossEntropy) {
    nn::Targets targets;
    targets.labels = data.labels;
    out.loss = nn::network_loss(net, cache.output, targets).value;
    long long correct = 0;
    for (int b = 0; b < cache.output.cols(); ++b) {
      int arg = 0;
      for (int c = 1; c < cache.output.rows(); ++c) {
        if (cache.output(c, b) > cache.output(arg, b)) arg = c;
      }
      if (arg == data.labels[b]) ++correct;
    }
    out.accuracy = static_cast<double>(correct) / cache.output.cols();
  } else {
    nn::Targets targets;
    targets.dense = data.targets.empty() ? data.x : data.targets;
    out.loss = nn::network_loss(net, cache.output, targets).value;
  }
  return out;
}

void check_kind(const ExperimentConfig& config, ExperimentKind expected, const char* runner) {
  if (config.experiment != expected) {
    throw UsageError(std::string(runner) + ": config describes experiment '" +
                     experiment_name(config.experiment) + "'");
  }
}

// Generic MLP from [model] dims: FC layers with the configured activation
// between them, constraints per fc_manifolds (default unconstrained).
void build_mlp(const ExperimentConfig& config, nn::NetworkSpec& net,
               std::vector<nn::ParamState>& params) {
  const std::vector<int>& dims = config.model.dims;
  const std::uint64_t init_seed = derive_seed(config.optimizer.seed, kInitStream);
  net.loss = config.model.loss;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const int in = dims[i];
    const int out = dims[i + 1];
    manifolds::ManifoldKind kind = manifolds::ManifoldKind::kEuclidean;
    if (!config.model.fc_manifolds.empty()) kind = config.model.fc_manifolds[i];
    if (kind != manifolds::ManifoldKind::kEuclidean && out > in) {
      throw ConfigError("[model]: constrained FC layers need out <= in, layer " +
                        std::to_string(i) + " maps " + std::to_string(in) + " -> " +
                        std::to_string(out));
    }
    manifolds::ManifoldDescriptor m{kind, in, out};
    nn::LayerSpec fc;
    fc.kind = nn::LayerKind::kFullyConnected;
    fc.in_dim = in;
    fc.out_dim = out;
    fc.param = static_cast<int>(params.size());
    fc.apply = nn::FcApply::kTransposed;
    fc.has_bias = true;
    net.layers.push_back(fc);
    nn::ParamState ps = nn::make_param(
        manifolds::random_point(m, derive_seed(init_seed, i)), m, out);
    params.push_back(std::move(ps));

    if (i + 2 < dims.size()) {
      nn::LayerSpec act;
      act.kind = nn::LayerKind::kActivation;
      act.in_dim = out;
      act.out_dim = out;
      act.activation = config.model.activation;
      net.layers.push_back(act);
    }
  }
  nn::validate_network(net, params);
}

}  // namespace

Matrix gen_gaussian_data(int n, int samples, const std::vector<double>& spectrum,
                         std::uint64_t seed) {
  if (static_cast<int>(spectrum.size()) != n) {
    throw InputError("gen_gaussian_data: spectrum length " +
                     std::to_string(spectrum.size()) + " != n = " + std::to_string(n));
  }
  for (double v : spectrum) {
    if (!(v > 0.0)) throw InputError("gen_gaussian_data: spectrum entries must be positive");
  }
  Rng rng(seed);
  const Matrix basis = linalg::qf(gaussian_matrix(n, n, rng));
  Matrix shaping(n, n);  // basis * diag(sqrt(spectrum))
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) shaping(i, j) = basis(i, j) * std::sqrt(spectrum[j]);
  Matrix x = linalg::matmul(shaping, gaussian_matrix(n, samples, rng));
  for (int i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int b = 0; b < samples; ++b) mean += x(i, b);
    mean /= samples;
    for (int b = 0; b < samples; ++b) x(i, b) -= mean;
  }
  return x;
}

MixtureData gen_gaussian_mixture(int n, int samples, int classes, double separation,
                                 std::uint64_t seed) {
  if (classes < 2) throw InputError("gen_gaussian_mixture: need at least 2 classes");
  if (samples < classes) throw InputError("gen_gaussian_mixture: need samples >= classes");
  Rng rng(seed);
  Matrix means = gaussian_matrix(n, classes, rng, separation);
  MixtureData out;
  out.x = Matrix(n, samples);
  out.labels.resize(samples);
  for (int b = 0; b < samples; ++b) {
    const int c = b % classes;
    out.labels[b] = c;
    for (int i = 0; i < n; ++i) out.x(i, b) = means(i, c) + rng.normal();
  }
  return out;
}

MixtureData load_csv_data(const std::string& path, bool with_labels) {
  std::ifstream file(path);
  if (!file) throw InputError("load_csv_data: cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("load_csv_data: '" + path + "':" + std::to_string(line_no) +
                         ": bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError("load_csv_data: '" + path + "':" + std::to_string(line_no) +
                       ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("load_csv_data: '" + path + "' has no samples");
  const int width = static_cast<int>(rows.front().size());
  const int features = with_labels ? width - 1 : width;
  if (features < 1) throw InputError("load_csv_data: '" + path + "' has no feature columns");

  MixtureData out;
  out.x = Matrix(features, static_cast<int>(rows.size()));
  if (with_labels) out.labels.resize(rows.size());
  for (std::size_t b = 0; b < rows.size(); ++b) {
    for (int i = 0; i < features; ++i) {
      if (!std::isfinite(rows[b][i])) {
        throw InputError("load_csv_data: non-finite feature in '" + path + "'");
      }
      out.x(i, static_cast<int>(b)) = rows[b][i];
    }
    if (with_labels) {
      const double raw = rows[b][width - 1];
      const int label = static_cast<int>(std::lround(raw));
      if (label < 0 || std::abs(raw - label) > 1e-9) {
        throw InputError("load_csv_data: bad label in '" + path + "' row " +
                         std::to_string(b + 1));
      }
      out.labels[b] = label;
    }
  }
  return out;
}

PcaRecoveryResult run_pca_recovery(const ExperimentConfig& config) {
  check_kind(config, ExperimentKind::kPcaRecovery, "run_pca_recovery");
  validate_config(config);
  const int n = config.data.n;
  const int p = config.model.p;

  const MixtureData data = load_dataset(config, false);
  const int samples = data.x.cols();

  // Sample covariance and its eigendecomposition form the oracle: the
  // reconstruction loss of the best rank-p subspace is the trailing
  // eigenvalue sum.
  const Matrix covariance = (1.0 / samples) * linalg::matmul(data.x, transpose(data.x));
  const linalg::EighResult eig = linalg::jacobi_eigh(covariance);
  PcaRecoveryResult result;
  for (int i = p; i < n; ++i) result.oracle_loss += eig.eigenvalues[i];
  Matrix top(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) top(i, j) = eig.eigenvectors(i, j);
  const Matrix oracle_projector = linalg::matmul(top, transpose(top));

  // One shared orthonormal parameter used as encoder (W^T x) and decoder
  // (W h); its gradient accumulates both uses.
  nn::NetworkSpec net;
  net.loss = nn::LossKind::kMseReconstruction;
  nn::LayerSpec encode;
  encode.kind = nn::LayerKind::kFullyConnected;
  encode.in_dim = n;
  encode.out_dim = p;
  encode.param = 0;
  encode.apply = nn::FcApply::kTransposed;
  net.layers.push_back(encode);
  nn::LayerSpec decode;
  decode.kind = nn::LayerKind::kFullyConnected;
  decode.in_dim = p;
  decode.out_dim = n;
  decode.param = 0;
  decode.apply = nn::FcApply::kPlain;
  net.layers.push_back(decode);

  const manifolds::ManifoldDescriptor stiefel = manifolds::stiefel(n, p);
  const Matrix w0 =
      manifolds::random_point(stiefel, derive_seed(config.optimizer.seed, kInitStream));

  optim::Dataset dataset;
  dataset.x = data.x;
  dataset.targets = data.x;

  auto run_method = [&](optim::Method method, std::vector<MetricsRecord>& metrics,
                        double& final_loss, double& projector_error, double& defect) {
    std::vector<nn::ParamState> params;
    params.push_back(nn::make_param(w0, stiefel));
    optim::OptimizerConfig opt = config.optimizer;
    opt.method = method;
    metrics = optim::train(net, params, dataset, opt);
    final_loss = evaluate(net, params, dataset).loss;
    const Matrix projector =
        linalg::matmul(params[0].weights, transpose(params[0].weights));
    projector_error = frobenius_norm(projector - oracle_projector);
    defect = manifolds::check_feasible(stiefel, params[0].weights).defect;
  };

  run_method(optim::Method::kGbp, result.gbp_metrics, result.gbp_final_loss,
             result.gbp_projector_error, result.gbp_final_defect);
  run_method(optim::Method::kPgd, result.pgd_metrics, result.pgd_final_loss,
             result.pgd_projector_error, result.pgd_final_defect);

  const std::string dir = prepare_output_dir(config);
  if (!dir.empty()) {
    emit_csv(result.gbp_metrics, join_path(dir, "gbp_metrics.csv"));
    emit_csv(result.pgd_metrics, join_path(dir, "pgd_metrics.csv"));
    SummaryWriter summary;
    summary.add("oracle_loss", result.oracle_loss);
    summary.add("gbp_final_loss", result.gbp_final_loss);
    summary.add("pgd_final_loss", result.pgd_final_loss);
    summary.add("gbp_projector_error", result.gbp_projector_error);
    summary.add("pgd_projector_error", result.pgd_projector_error);
    summary.add("gbp_final_defect", result.gbp_final_defect);
    summary.add("pgd_final_defect", result.pgd_final_defect);
    summary.write(join_path(dir, "summary.csv"));
    write_manifest(join_path(dir, "manifest.ini"), config);
  }
  return result;
}

AutoencoderResult run_autoencoder(const ExperimentConfig& config) {
  check_kind(config, ExperimentKind::kAutoencoder, "run_autoencoder");
  validate_config(config);
  const int n = config.data.n;
  const int p = config.model.p;

  const MixtureData data = load_dataset(config, true);
  const Split split = split_dataset(data, config.data.test_fraction,
                                    derive_seed(config.optimizer.seed, kSplitStream), true);

  const bool encoder_constrained = config.model.variant != AeVariant::kDae;
  const bool decoder_constrained = config.model.variant == AeVariant::kO2dae;
  const manifolds::ManifoldDescriptor enc_manifold =
      encoder_constrained ? manifolds::stiefel(n, p) : manifolds::euclidean(n, p);
  const manifolds::ManifoldDescriptor dec_manifold =
      decoder_constrained ? manifolds::stiefel(n, p) : manifolds::euclidean(n, p);

  nn::NetworkSpec net;
  net.loss = nn::LossKind::kMseReconstruction;
  nn::LayerSpec encode;
  encode.kind = nn::LayerKind::kFullyConnected;
  encode.in_dim = n;
  encode.out_dim = p;
  encode.param = 0;
  encode.apply = nn::FcApply::kTransposed;
  encode.has_bias = true;
  net.layers.push_back(encode);
  nn::LayerSpec act;
  act.kind = nn::LayerKind::kActivation;
  act.in_dim = p;
  act.out_dim = p;
  act.activation = config.model.activation;
  net.layers.push_back(act);
  nn::LayerSpec decode;
  decode.kind = nn::LayerKind::kFullyConnected;
  decode.in_dim = p;
  decode.out_dim = n;
  decode.param = 1;
  decode.apply = nn::FcApply::kPlain;
  decode.has_bias = true;
  net.layers.push_back(decode);

  const std::uint64_t init_seed = derive_seed(config.optimizer.seed, kInitStream);
  std::vector<nn::ParamState> params;
  params.push_back(nn::make_param(manifolds::random_point(enc_manifold, derive_seed(init_seed, 0)),
                                  enc_manifold, p));
  params.push_back(nn::make_param(manifolds::random_point(dec_manifold, derive_seed(init_seed, 1)),
                                  dec_manifold, n));

  optim::TrainHooks hooks;
  if (config.model.noise_scale > 0.0) {
    hooks.input_noise_std.resize(n);
    const int train_count = split.train.x.cols();
    for (int i = 0; i < n; ++i) {
      double mean = 0.0;
      for (int b = 0; b < train_count; ++b) mean += split.train.x(i, b);
      mean /= train_count;
      double var = 0.0;
      for (int b = 0; b < train_count; ++b) {
        const double d = split.train.x(i, b) - mean;
        var += d * d;
      }
      hooks.input_noise_std[i] = config.model.noise_scale * std::sqrt(var / train_count);
    }
  }

  AutoencoderResult result;
  result.metrics = optim::train(net, params, split.train, config.optimizer, hooks);
  result.final_train_loss = evaluate(net, params, split.train).loss;
  if (!split.test.x.empty()) result.test_loss = evaluate(net, params, split.test).loss;
  result.encoder_defect =
      manifolds::check_feasible(manifolds::stiefel(n, p), params[0].weights).defect;
  result.decoder_defect =
      manifolds::check_feasible(manifolds::stiefel(n, p), params[1].weights).defect;

  // Nearest-centroid probe on noiseless encoder outputs: centroids from the
  // training encodings, accuracy on the held-out split.
  auto encode_batch = [&](const Matrix& x) {
    return nn::activation_forward(
        config.model.activation,
        nn::fc_forward(params[0].weights, params[0].bias, x, nn::FcApply::kTransposed));
  };
  if (!split.test.x.empty()) {
    const Matrix train_codes = encode_batch(split.train.x);
    const Matrix test_codes = encode_batch(split.test.x);
    const int classes = config.data.classes;
    Matrix centroids(p, classes);
    std::vector<int> counts(classes, 0);
    for (int b = 0; b < train_codes.cols(); ++b) {
      const int c = split.train.labels[b];
      ++counts[c];
      for (int i = 0; i < p; ++i) centroids(i, c) += train_codes(i, b);
    }
    for (int c = 0; c < classes; ++c) {
      if (counts[c] > 0) {
        for (int i = 0; i < p; ++i) centroids(i, c) /= counts[c];
      }
    }
    long long correct = 0;
    for (int b = 0; b < test_codes.cols(); ++b) {
      int best = 0;
      double best_dist = 0.0;
      for (int c = 0; c < classes; ++c) {
        double dist = 0.0;
        for (int i = 0; i < p; ++i) {
          const double d = test_codes(i, b) - centroids(i, c);
          dist += d * d;
        }
        if (c == 0 || dist < best_dist) {
          best = c;
          best_dist = dist;
        }
      }
      if (best == split.test.labels[b]) ++correct;
    }
    result.probe_accuracy = static_cast<double>(correct) / test_codes.cols();
  }

  const std::string dir = prepare_output_dir(config);
  if (!dir.empty()) {
    emit_csv(result.metrics, join_path(dir, "metrics.csv"));
    SummaryWriter summary;
    summary.add("final_train_loss", result.final_train_loss);
    summary.add("test_loss", result.test_loss);
    summary.add("probe_accuracy", result.probe_accuracy);
    summary.add("encoder_defect", result.encoder_defect);
    summary.add("decoder_defect", result.decoder_defect);
    summary.write(join_path(dir, "summary.csv"));
    write_manifest(join_path(dir, "manifest.ini"), config);
  }
  return result;
}

TrainGenericResult run_train_generic(const ExperimentConfig& config) {
  check_kind(config, ExperimentKind::kTrainGeneric, "run_train_generic");
  validate_config(config);
  const bool classification = config.model.loss == nn::LossKind::kSoftmaxCrossEntropy;

  const MixtureData data = load_dataset(config, classification);
  const Split split = split_dataset(data, config.data.test_fraction,
                                    derive_seed(config.optimizer.seed, kSplitStream),
                                    !classification);

  nn::NetworkSpec net;
  std::vector<nn::ParamState> params;
  build_mlp(config, net, params);

  TrainGenericResult result;
  result.metrics = optim::train(net, params, split.train, config.optimizer);
  const Evaluation train_eval = evaluate(net, params, split.train);
  result.final_train_loss = train_eval.loss;
  result.final_train_accuracy = train_eval.accuracy;
  if (!split.test.x.empty()) {
    const Evaluation test_eval = evaluate(net, params, split.test);
    result.test_loss = test_eval.loss;
    result.test_accuracy = test_eval.accuracy;
  }

  const std::string dir = prepare_output_dir(config);
  if (!dir.empty()) {
    result.snapshot_path = join_path(dir, "snapshot.gbp");
    nn::save_snapshot(result.snapshot_path, net, params);
    emit_csv(result.metrics, join_path(dir, "metrics.csv"));
    SummaryWriter summary;
    summary.add("final_train_loss", result.final_train_loss);
    if (result.final_train_accuracy) {
      summary.add("final_train_accuracy", *result.final_train_accuracy);
    }
    summary.add("test_loss", result.test_loss);
    if (result.test_accuracy) summary.add("test_accuracy", *result.test_accuracy);
    summary.add("param_count", nn::network_param_count(net, params));
    summary.write(join_path(dir, "summary.csv"));
    write_manifest(join_path(dir, "manifest.ini"), config);
  }
  return result;
}

LowrankResult run_lowrank_simplify(const ExperimentConfig& config) {
  check_kind(config, ExperimentKind::kLowrankSimplify, "run_lowrank_simplify");
  validate_config(config);
  if (!std::filesystem::exists(config.model.snapshot)) {
    throw InputError("run_lowrank_simplify: snapshot '" + config.model.snapshot +
                     "' does not exist");
  }
  nn::Snapshot snap = nn::load_snapshot(config.model.snapshot);
  const bool classification = snap.net.loss == nn::LossKind::kSoftmaxCrossEntropy;

  const MixtureData data = load_dataset(config, classification);
  const Split split = split_dataset(data, config.data.test_fraction,
                                    derive_seed(config.optimizer.seed, kSplitStream),
                                    !classification);

  const int layer_index = config.model.layer_index;
  if (layer_index < 0 || layer_index >= static_cast<int>(snap.net.layers.size()) ||
      snap.net.layers[layer_index].kind != nn::LayerKind::kFullyConnected) {
    throw InputError("run_lowrank_simplify: layer_index " + std::to_string(layer_index) +
                     " is not a fully-connected layer of the snapshot");
  }
  const Matrix& w = snap.params[snap.net.layers[layer_index].param].weights;

  LowrankResult result;
  result.params_before = static_cast<long long>(w.rows()) * w.cols();
  const Evaluation before = evaluate(snap.net, snap.params, split.test);
  result.loss_before = before.loss;
  result.accuracy_before = before.accuracy;

  const nn::LowRankFactors factors =
      config.model.rank > 0 ? nn::factorize_fc_lowrank_rank(w, config.model.rank)
                            : nn::factorize_fc_lowrank(w, config.model.rho);
  result.chosen_rank = factors.rank;
  result.params_after = nn::lowrank_param_count(w.rows(), w.cols(), factors.rank);

  nn::replace_fc_with_lowrank(snap.net, snap.params, layer_index, factors);
  const Evaluation after = evaluate(snap.net, snap.params, split.test);
  result.loss_after_surgery = after.loss;
  result.accuracy_after_surgery = after.accuracy;

  result.finetune_metrics = optim::train(snap.net, snap.params, split.train, config.optimizer);
  const Evaluation tuned = evaluate(snap.net, snap.params, split.test);
  result.loss_after_finetune = tuned.loss;
  result.accuracy_after_finetune = tuned.accuracy;

  const std::string dir = prepare_output_dir(config);
  if (!dir.empty()) {
    emit_csv(result.finetune_metrics, join_path(dir, "finetune_metrics.csv"));
    nn::save_snapshot(join_path(dir, "snapshot_lowrank.gbp"), snap.net, snap.params);
    SummaryWriter summary;
    summary.add("chosen_rank", static_cast<long long>(result.chosen_rank));
    summary.add("params_before", result.params_before);
    summary.add("params_after", result.params_after);
    summary.add("loss_before", result.loss_before);
    summary.add("loss_after_surgery", result.loss_after_surgery);
    summary.add("loss_after_finetune", result.loss_after_finetune);
    if (result.accuracy_before) summary.add("accuracy_before", *result.accuracy_before);
    if (result.accuracy_after_surgery) {
      summary.add("accuracy_after_surgery", *result.accuracy_after_surgery);
    }
    if (result.accuracy_after_finetune) {
      summary.add("accuracy_after_finetune", *result.accuracy_after_finetune);
    }
    summary.write(join_path(dir, "summary.csv"));
    write_manifest(join_path(dir, "manifest.ini"), config);
  }
  return result;
}

void run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case ExperimentKind::kPcaRecovery:
      run_pca_recovery(config);
      return;
    case ExperimentKind::kAutoencoder:
      run_autoencoder(config);
      return;
    case ExperimentKind::kTrainGeneric:
      run_train_generic(config);
      return;
    case ExperimentKind::kLowrankSimplify:
      run_lowrank_simplify(config);
      return;
  }
  throw UsageError("run_experiment: unknown experiment kind");
}

}  // namespace gbp::expt
