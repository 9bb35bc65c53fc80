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

#include "gbp/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gbp/version.hpp"

namespace gbp::expt {

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

struct ParseContext {
  std::string origin;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }
};

long parse_long(const ParseContext& ctx, const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    ctx.fail("key '" + key + "': expected an integer, got '" + value + "'");
  }
}

double parse_real(const ParseContext& ctx, const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    ctx.fail("key '" + key + "': expected a real number, got '" + value + "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string cell;
  std::istringstream ss(value);
  while (std::getline(ss, cell, ',')) parts.push_back(trim(cell));
  return parts;
}

// Symmetric enum <-> name tables; emission uses the same names parsing accepts.

const std::pair<ExperimentKind, const char*> kExperimentNames[] = {
    {ExperimentKind::kPcaRecovery, "pca_recovery"},
    {ExperimentKind::kAutoencoder, "autoencoder"},
    {ExperimentKind::kLowrankSimplify, "lowrank_simplify"},
    {ExperimentKind::kTrainGeneric, "train_generic"},
};
const std::pair<DataSource, const char*> kSourceNames[] = {
    {DataSource::kSyntheticGaussian, "synthetic-gaussian"},
    {DataSource::kSyntheticMixture, "synthetic-mixture"},
    {DataSource::kCsvFile, "csv-file"},
};
const std::pair<nn::ActivationKind, const char*> kActivationNames[] = {
    {nn::ActivationKind::kIdentity, "identity"},
    {nn::ActivationKind::kSigmoid, "sigmoid"},
    {nn::ActivationKind::kTanh, "tanh"},
    {nn::ActivationKind::kRelu, "relu"},
};
const std::pair<AeVariant, const char*> kVariantNames[] = {
    {AeVariant::kDae, "dae"},
    {AeVariant::kOdae, "odae"},
    {AeVariant::kO2dae, "o2dae"},
};
const std::pair<nn::LossKind, const char*> kLossNames[] = {
    {nn::LossKind::kMseReconstruction, "mse_reconstruction"},
    {nn::LossKind::kSoftmaxCrossEntropy, "softmax_ce"},
};
const std::pair<optim::Method, const char*> kMethodNames[] = {
    {optim::Method::kBp, "bp"},
    {optim::Method::kGbp, "gbp"},
    {optim::Method::kPgd, "pgd"},
};
const std::pair<optim::LrSchedule, const char*> kScheduleNames[] = {
    {optim::LrSchedule::kConstant, "constant"},
    {optim::LrSchedule::kLogLinear, "log-linear"},
    {optim::LrSchedule::kLinear, "linear"},
};
const std::pair<manifolds::ManifoldKind, const char*> kManifoldNames[] = {
    {manifolds::ManifoldKind::kEuclidean, "euclidean"},
    {manifolds::ManifoldKind::kStiefel, "stiefel"},
    {manifolds::ManifoldKind::kOblique, "oblique"},
};

template <typename E, std::size_t N>
const char* enum_name(const std::pair<E, const char*> (&table)[N], E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "unknown";
}

template <typename E, std::size_t N>
E parse_enum(const ParseContext& ctx, const std::pair<E, const char*> (&table)[N],
             const std::string& key, const std::string& value) {
  std::string choices;
  for (const auto& [e, name] : table) {
    if (value == name) return e;
    if (!choices.empty()) choices += " | ";
    choices += name;
  }
  ctx.fail("key '" + key + "': unknown value '" + value + "' (expected " + choices + ")");
}

void apply_data_key(const ParseContext& ctx, DataConfig& data, const std::string& key,
                    const std::string& value) {
  if (key == "source") {
    data.source = parse_enum(ctx, kSourceNames, key, value);
  } else if (key == "n") {
    data.n = static_cast<int>(parse_long(ctx, key, value));
  } else if (key == "samples") {
    data.samples = static_cast<int>(parse_long(ctx, key, value));
  } else if (key == "spectrum") {
    data.spectrum.clear();
    for (const std::string& cell : split_list(value)) {
      data.spectrum.push_back(parse_real(ctx, key, cell));
    }
  } else if (key == "classes") {
    data.classes = static_cast<int>(parse_long(ctx, key, value));
  } else if (key == "class_separation") {
    data.class_separation = parse_real(ctx, key, value);
  } else if (key == "test_fraction") {
    data.test_fraction = parse_real(ctx, key, value);
  } else if (key == "csv_path") {
    data.csv_path = value;
  } else {
    ctx.fail("unknown key '" + key + "' in [data]");
  }
}

void apply_model_key(const ParseContext& ctx, ModelConfig& model, const std::string& key,
                     const std::string& value) {
  if (key == "p") {
    model.p = static_cast<int>(parse_long(ctx, key, value));
  } else if (key == "activation") {
    model.activation = parse_enum(ctx, kActivationNames, key, value);
  } else if (key == "variant") {
    model.variant = parse_enum(ctx, kVariantNames, key, value);
  } else if (key == "loss") {
    model.loss = parse_enum(ctx, kLossNames, key, value);
  } else if (key == "dims") {
    model.dims.clear();
    for (const std::string& cell : split_list(value)) {
      model.dims.push_back(static_cast<int>(parse_long(ctx, key, cell)));
    }
  } else if (key == "fc_manifolds") {
    model.fc_manifolds.clear();
    for (const std::string& cell : split_list(value)) {
      model.fc_manifolds.push_back(parse_enum(ctx, kManifoldNames, key, cell));
    }
  } else if (key == "noise_scale") {
    model.noise_scale = parse_real(ctx, key, value);
  } else if (key == "snapshot") {
    model.snapshot = value;
  } else if (key == "layer_index") {
    model.layer_index = static_cast<int>(parse_long(ctx, key, value));
  } else if (key == "rho") {
    model.rho = parse_real(ctx, key, value);
  } else if (key == "rank") {
    model.rank = static_cast<int>(parse_long(ctx, key, value));
  } else {
    ctx.fail("unknown key '" + key + "' in [model]");
  }
}

void apply_optimizer_key(const ParseContext& ctx, optim::OptimizerConfig& opt,
                         const std::string& key, const std::string& value) {
  if (key == "method") {
    opt.method = parse_enum(ctx, kMethodNames, key, value);
  } else if (key == "lr_start") {
    opt.lr_start = parse_real(ctx, key, value);
  } else if (key == "lr_end") {
    opt.lr_end = parse_real(ctx, key, value);
  } else if (key == "schedule") {
    opt.schedule = parse_enum(ctx, kScheduleNames, key, value);
  } else if (key == "momentum") {
    opt.momentum = parse_real(ctx, key, value);
  } else if (key == "weight_decay") {
    opt.weight_decay = parse_real(ctx, key, value);
  } else if (key == "epochs") {
    opt.epochs = static_cast<int>(parse_long(ctx, key, value));
  } else if (key == "batch_size") {
    opt.batch_size = static_cast<int>(parse_long(ctx, key, value));
  } else if (key == "seed") {
    opt.seed = static_cast<std::uint64_t>(parse_long(ctx, key, value));
  } else {
    ctx.fail("unknown key '" + key + "' in [optimizer]");
  }
}

}  // namespace

std::vector<double> default_pca_spectrum(int n, int p) {
  std::vector<double> spectrum(n);
  for (int i = 0; i < n; ++i) {
    if (i < p) {
      spectrum[i] = 8.0 + 4.0 * (p - 1 - i);
    } else {
      spectrum[i] = 4.0 * std::pow(0.9, i - p);
    }
  }
  return spectrum;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.optimizer.seed = 7;
  switch (kind) {
    case ExperimentKind::kPcaRecovery:
      c.data.source = DataSource::kSyntheticGaussian;
      c.data.n = 16;
      c.data.samples = 2000;
      c.model.p = 4;
      c.data.spectrum = default_pca_spectrum(c.data.n, c.model.p);
      c.model.loss = nn::LossKind::kMseReconstruction;
      c.model.activation = nn::ActivationKind::kIdentity;
      c.optimizer.method = optim::Method::kGbp;
      c.optimizer.lr_start = 0.02;
      c.optimizer.lr_end = 0.001;
      c.optimizer.schedule = optim::LrSchedule::kLogLinear;
      c.optimizer.momentum = 0.0;
      c.optimizer.epochs = 200;
      c.optimizer.batch_size = 100;
      break;
    case ExperimentKind::kAutoencoder:
      c.data.source = DataSource::kSyntheticMixture;
      c.data.n = 32;
      c.data.samples = 1600;
      c.data.classes = 4;
      c.data.class_separation = 3.0;
      c.model.p = 8;
      c.model.activation = nn::ActivationKind::kSigmoid;
      c.model.variant = AeVariant::kO2dae;
      c.model.loss = nn::LossKind::kMseReconstruction;
      c.model.noise_scale = 0.1;
      c.optimizer.method = optim::Method::kGbp;
      c.optimizer.lr_start = 0.1;
      c.optimizer.lr_end = 0.01;
      c.optimizer.momentum = 0.9;
      c.optimizer.epochs = 100;
      c.optimizer.batch_size = 50;
      break;
    case ExperimentKind::kTrainGeneric:
      c.data.source = DataSource::kSyntheticMixture;
      c.data.n = 32;
      c.data.samples = 3000;
      c.data.classes = 6;
      c.data.class_separation = 2.5;
      c.model.dims = {32, 24, 6};
      c.model.activation = nn::ActivationKind::kTanh;
      c.model.loss = nn::LossKind::kSoftmaxCrossEntropy;
      c.optimizer.method = optim::Method::kGbp;
      c.optimizer.lr_start = 0.05;
      c.optimizer.lr_end = 0.005;
      c.optimizer.momentum = 0.9;
      c.optimizer.epochs = 40;
      c.optimizer.batch_size = 50;
      break;
    case ExperimentKind::kLowrankSimplify:
      c.data.source = DataSource::kSyntheticMixture;
      c.data.n = 32;
      c.data.samples = 3000;
      c.data.classes = 6;
      c.data.class_separation = 2.5;
      c.model.dims = {32, 24, 6};
      c.model.activation = nn::ActivationKind::kTanh;
      c.model.loss = nn::LossKind::kSoftmaxCrossEntropy;
      c.model.layer_index = 0;
      c.model.rho = 60.0;
      c.optimizer.method = optim::Method::kGbp;
      c.optimizer.lr_start = 0.01;
      c.optimizer.lr_end = 0.001;
      c.optimizer.momentum = 0.9;
      c.optimizer.epochs = 20;
      c.optimizer.batch_size = 50;
      break;
  }
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_config_text(buffer.str(), path);
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  struct Line {
    int number;
    std::string section;  // "" for top level
    std::string key;
    std::string value;
  };
  std::vector<Line> entries;

  ParseContext ctx{origin, 0};
  std::string section;
  std::istringstream stream(text);
  std::string raw;
  while (std::getline(stream, raw)) {
    ++ctx.line;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') ctx.fail("malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "data" && section != "model" && section != "optimizer" &&
          section != "output") {
        ctx.fail("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) ctx.fail("expected 'key = value', got '" + line + "'");
    entries.push_back({ctx.line, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }

  // The experiment kind selects the defaults, so resolve it first.
  ExperimentKind kind = ExperimentKind::kPcaRecovery;
  bool kind_seen = false;
  for (const Line& e : entries) {
    if (e.section.empty() && e.key == "experiment") {
      ctx.line = e.number;
      kind = parse_enum(ctx, kExperimentNames, e.key, e.value);
      kind_seen = true;
    }
  }
  if (!kind_seen) {
    throw ConfigError(origin + ": missing required top-level key 'experiment'");
  }

  ExperimentConfig config = default_config(kind);
  bool spectrum_given = false;
  for (const Line& e : entries) {
    ctx.line = e.number;
    if (e.section.empty()) {
      if (e.key != "experiment") {
        ctx.fail("unknown top-level key '" + e.key + "' (only 'experiment' is allowed)");
      }
      continue;
    }
    if (e.section == "data") {
      if (e.key == "spectrum") spectrum_given = true;
      apply_data_key(ctx, config.data, e.key, e.value);
    } else if (e.section == "model") {
      apply_model_key(ctx, config.model, e.key, e.value);
    } else if (e.section == "optimizer") {
      apply_optimizer_key(ctx, config.optimizer, e.key, e.value);
    } else {
      if (e.key != "dir") ctx.fail("unknown key '" + e.key + "' in [output]");
      config.output_dir = e.value;
    }
  }

  // A gaussian source without an explicit spectrum gets the gapped default
  // matching the configured dimensions.
  if (config.data.source == DataSource::kSyntheticGaussian && !spectrum_given) {
    config.data.spectrum = default_pca_spectrum(config.data.n, config.model.p);
  }

  validate_config(config);
  return config;
}

void validate_config(const ExperimentConfig& config) {
  const DataConfig& data = config.data;
  if (data.n <= 0 || data.samples <= 0) {
    throw ConfigError("[data]: n and samples must be positive");
  }
  if (data.source == DataSource::kSyntheticGaussian) {
    if (static_cast<int>(data.spectrum.size()) != data.n) {
      throw ConfigError("[data]: spectrum must list exactly n = " + std::to_string(data.n) +
                        " eigenvalues, got " + std::to_string(data.spectrum.size()));
    }
    for (double v : data.spectrum) {
      if (!(v > 0.0)) throw ConfigError("[data]: spectrum eigenvalues must be positive");
    }
  }
  if (data.source == DataSource::kSyntheticMixture && data.classes < 2) {
    throw ConfigError("[data]: a mixture needs at least 2 classes");
  }
  if (data.source == DataSource::kCsvFile) {
    if (data.csv_path.empty()) throw ConfigError("[data]: csv_path is required");
    if (!std::filesystem::exists(data.csv_path)) {
      throw ConfigError("[data]: csv file '" + data.csv_path + "' does not exist");
    }
  }
  if (data.test_fraction < 0.0 || data.test_fraction >= 1.0) {
    throw ConfigError("[data]: test_fraction must lie in [0, 1)");
  }

  const ModelConfig& model = config.model;
  if (model.p <= 0) throw ConfigError("[model]: p must be positive");
  if (model.noise_scale < 0.0) throw ConfigError("[model]: noise_scale must be nonnegative");
  if (!(model.rho > 0.0) || model.rho > 100.0) {
    throw ConfigError("[model]: rho must lie in (0, 100]");
  }
  if (model.rank < 0) throw ConfigError("[model]: rank must be nonnegative");
  if (!model.fc_manifolds.empty() && !model.dims.empty() &&
      model.fc_manifolds.size() != model.dims.size() - 1) {
    throw ConfigError("[model]: fc_manifolds must list one entry per FC layer");
  }

  switch (config.experiment) {
    case ExperimentKind::kPcaRecovery:
      if (model.p > data.n) throw ConfigError("[model]: p must not exceed data n");
      break;
    case ExperimentKind::kAutoencoder:
      if (model.p > data.n) throw ConfigError("[model]: p must not exceed data n");
      break;
    case ExperimentKind::kTrainGeneric:
      if (model.dims.size() < 2) {
        throw ConfigError("[model]: dims must chain at least two dimensions");
      }
      for (int d : model.dims) {
        if (d <= 0) throw ConfigError("[model]: dims entries must be positive");
      }
      if (model.dims.front() != data.n) {
        throw ConfigError("[model]: dims must start at the feature dimension n");
      }
      break;
    case ExperimentKind::kLowrankSimplify:
      if (model.snapshot.empty()) {
        throw ConfigError("[model]: snapshot is required for lowrank_simplify");
      }
      break;
  }

  optim::validate_optimizer_config(config.optimizer);
}

std::string emit_config(const ExperimentConfig& config) {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  };

  line("experiment", enum_name(kExperimentNames, config.experiment));
  out += "\n[data]\n";
  line("source", enum_name(kSourceNames, config.data.source));
  line("n", std::to_string(config.data.n));
  line("samples", std::to_string(config.data.samples));
  if (!config.data.spectrum.empty()) {
    std::string list;
    for (double v : config.data.spectrum) {
      if (!list.empty()) list += ",";
      list += format_real(v);
    }
    line("spectrum", list);
  }
  line("classes", std::to_string(config.data.classes));
  line("class_separation", format_real(config.data.class_separation));
  line("test_fraction", format_real(config.data.test_fraction));
  if (!config.data.csv_path.empty()) line("csv_path", config.data.csv_path);

  out += "\n[model]\n";
  line("p", std::to_string(config.model.p));
  line("activation", enum_name(kActivationNames, config.model.activation));
  line("variant", enum_name(kVariantNames, config.model.variant));
  line("loss", enum_name(kLossNames, config.model.loss));
  if (!config.model.dims.empty()) {
    std::string list;
    for (int d : config.model.dims) {
      if (!list.empty()) list += ",";
      list += std::to_string(d);
    }
    line("dims", list);
  }
  if (!config.model.fc_manifolds.empty()) {
    std::string list;
    for (manifolds::ManifoldKind kind : config.model.fc_manifolds) {
      if (!list.empty()) list += ",";
      list += enum_name(kManifoldNames, kind);
    }
    line("fc_manifolds", list);
  }
  line("noise_scale", format_real(config.model.noise_scale));
  if (!config.model.snapshot.empty()) line("snapshot", config.model.snapshot);
  line("layer_index", std::to_string(config.model.layer_index));
  line("rho", format_real(config.model.rho));
  line("rank", std::to_string(config.model.rank));

  out += "\n[optimizer]\n";
  line("method", enum_name(kMethodNames, config.optimizer.method));
  line("lr_start", format_real(config.optimizer.lr_start));
  line("lr_end", format_real(config.optimizer.lr_end));
  line("schedule", enum_name(kScheduleNames, config.optimizer.schedule));
  line("momentum", format_real(config.optimizer.momentum));
  line("weight_decay", format_real(config.optimizer.weight_decay));
  line("epochs", std::to_string(config.optimizer.epochs));
  line("batch_size", std::to_string(config.optimizer.batch_size));
  line("seed", std::to_string(config.optimizer.seed));

  out += "\n[output]\n";
  if (!config.output_dir.empty()) line("dir", config.output_dir);
  return out;
}

void write_manifest(const std::string& path, const ExperimentConfig& config) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("write_manifest: cannot open '" + path + "'");
  file << "# gbp " << kVersion << " run manifest; re-run with: gbp "
       << experiment_name(config.experiment) << " --config <this file>\n";
  file << emit_config(config);
  if (!file) throw IoError("write_manifest: write to '" + path + "' failed");
}

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kPcaRecovery: return "pca-recovery";
    case ExperimentKind::kAutoencoder: return "autoencoder";
    case ExperimentKind::kLowrankSimplify: return "lowrank";
    case ExperimentKind::kTrainGeneric: return "train";
  }
  return "unknown";
}

std::string config_reference() {
  return R"(Config file format: "key = value" lines under [section] headers; '#' starts
a comment; unknown keys are errors. The top-level key `experiment` selects
the defaults (pca_recovery | autoencoder | lowrank_simplify | train_generic).

[data]
  source           synthetic-gaussian | synthetic-mixture | csv-file
  n                feature dimension
  samples          sample count
  spectrum         comma list of n positive covariance eigenvalues
                   (synthetic-gaussian; default: gapped spectrum for (n, p))
  classes          mixture class count          (synthetic-mixture)
  class_separation mixture mean separation      (synthetic-mixture)
  test_fraction    held-out fraction in [0, 1)
  csv_path         csv file, one sample per row; with a classification loss
                   the last column is an integer label

[model]
  p                constrained layer width (pca_recovery, autoencoder)
  activation       identity | sigmoid | tanh | relu
  variant          dae | odae | o2dae           (autoencoder)
  loss             mse_reconstruction | softmax_ce
  dims             comma list of FC dims        (train_generic)
  fc_manifolds     per-FC constraint: euclidean | stiefel | oblique
  noise_scale      denoising noise as a multiple of per-feature stddev
  snapshot         trained snapshot to simplify (lowrank_simplify)
  layer_index      FC layer to factorize        (lowrank_simplify)
  rho              energy percent in (0, 100]   (lowrank_simplify)
  rank             explicit rank override; 0 uses rho

[optimizer]
  method           bp | gbp | pgd
  lr_start lr_end  learning-rate endpoints (lr_end <= lr_start)
  schedule         constant | log-linear | linear
  momentum         in [0, 1]
  weight_decay     applied to unconstrained parameters and biases
  epochs batch_size seed

[output]
  dir              output directory for CSV metrics + manifest
)";
}

}  // namespace gbp::expt
