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

#include <string>
#include <vector>

#include "gbp/network.hpp"
#include "gbp/optim.hpp"

namespace gbp::expt {

enum class ExperimentKind { kPcaRecovery, kAutoencoder, kLowrankSimplify, kTrainGeneric };
enum class DataSource { kSyntheticGaussian, kSyntheticMixture, kCsvFile };
enum class AeVariant { kDae, kOdae, kO2dae };

struct DataConfig {
  DataSource source = DataSource::kSyntheticGaussian;
  int n = 16;                    // feature dimension
  int samples = 2000;            // sample count
  std::vector<double> spectrum;  // covariance eigenvalues (synthetic-gaussian)
  int classes = 4;               // synthetic-mixture
  double class_separation = 3.0;
  double test_fraction = 0.25;
  std::string csv_path;

  bool operator==(const DataConfig&) const = default;
};

struct ModelConfig {
  int p = 4;  // constrained layer width
  nn::ActivationKind activation = nn::ActivationKind::kSigmoid;
  AeVariant variant = AeVariant::kO2dae;
  nn::LossKind loss = nn::LossKind::kMseReconstruction;
  std::vector<int> dims;  // FC chain for train_generic
  std::vector<manifolds::ManifoldKind> fc_manifolds;  // per FC layer; empty = euclidean
  double noise_scale = 0.1;  // denoising noise, times per-feature stddev
  std::string snapshot;      // lowrank_simplify input
  int layer_index = 0;       // FC layer to factorize
  double rho = 60.0;         // energy percent
  int rank = 0;              // explicit rank override; 0 = use rho

  bool operator==(const ModelConfig&) const = default;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kPcaRecovery;
  DataConfig data;
  ModelConfig model;
  optim::OptimizerConfig optimizer;
  std::string output_dir;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Fully-populated defaults for one experiment kind.
ExperimentConfig default_config(ExperimentKind kind);

/// Default covariance spectrum for PCA recovery: a clear gap between the
/// leading p eigenvalues and a decaying tail.
std::vector<double> default_pca_spectrum(int n, int p);

/// Parses the key-value experiment description. The file must name its
/// `experiment`; sections are [data], [model], [optimizer], [output].
/// Unknown sections or keys and malformed values raise ConfigError with
/// file/line context. Missing keys keep their documented defaults.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

/// Serializes a config so that parsing the result reproduces it exactly.
std::string emit_config(const ExperimentConfig& config);

/// Writes the resolved config as a run manifest (a valid config file with a
/// version comment) next to the run's CSV output.
void write_manifest(const std::string& path, const ExperimentConfig& config);

/// Enforces the config invariants (positive spectrum matching n, existing
/// csv paths, sane fractions, experiment-specific requirements).
void validate_config(const ExperimentConfig& config);

std::string experiment_name(ExperimentKind kind);

/// One-page description of every config key, shown by the CLI help.
std::string config_reference();

}  // namespace gbp::expt
