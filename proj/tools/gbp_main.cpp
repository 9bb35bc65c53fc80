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

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "gbp/config.hpp"
#include "gbp/experiments.hpp"
#include "gbp/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitIo = 3;

struct SubcommandArgs {
  std::string config_path;
  std::int64_t seed = -1;  // < 0: keep the config's seed
  std::string out_dir;
  bool print_config = false;
};

int run(gbp::expt::ExperimentKind kind, const SubcommandArgs& args) {
  gbp::expt::ExperimentConfig config = gbp::expt::parse_config(args.config_path);
  if (config.experiment != kind) {
    throw gbp::ConfigError("config describes experiment '" +
                           gbp::expt::experiment_name(config.experiment) +
                           "' but the subcommand expects '" +
                           gbp::expt::experiment_name(kind) + "'");
  }
  if (args.seed >= 0) config.optimizer.seed = static_cast<std::uint64_t>(args.seed);
  if (!args.out_dir.empty()) config.output_dir = args.out_dir;
  if (args.print_config) {
    std::fputs(gbp::expt::emit_config(config).c_str(), stdout);
    return kExitOk;
  }
  gbp::expt::run_experiment(config);
  if (!config.output_dir.empty()) {
    std::printf("wrote metrics, summary and manifest to %s\n", config.output_dir.c_str());
  }
  return kExitOk;
}

void add_common_options(CLI::App* cmd, SubcommandArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "experiment config file")->required();
  cmd->add_option("-s,--seed", args.seed, "override the config's seed");
  cmd->add_option("-o,--out", args.out_dir, "override the output directory");
  cmd->add_flag("--print-config", args.print_config,
                "print the resolved config and exit without running");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("gbp ") + gbp::kVersion +
               " -- train feed-forward networks with manifold-constrained weights"};
  app.require_subcommand(1);
  app.footer(gbp::expt::config_reference());

  SubcommandArgs args;
  using Kind = gbp::expt::ExperimentKind;

  auto* pca = app.add_subcommand(
      "pca-recovery", "compare gBP and PGD on subspace recovery against the eigen oracle");
  add_common_options(pca, args);
  auto* ae = app.add_subcommand(
      "autoencoder", "train a denoising autoencoder (dae | odae | o2dae) with a linear probe");
  add_common_options(ae, args);
  auto* lowrank = app.add_subcommand(
      "lowrank", "factorize an FC layer of a trained snapshot and fine-tune the result");
  add_common_options(lowrank, args);
  auto* train = app.add_subcommand("train", "train a generic MLP and save a snapshot");
  add_common_options(train, args);

  CLI11_PARSE(app, argc, argv);

  Kind kind = Kind::kPcaRecovery;
  if (ae->parsed()) kind = Kind::kAutoencoder;
  if (lowrank->parsed()) kind = Kind::kLowrankSimplify;
  if (train->parsed()) kind = Kind::kTrainGeneric;

  try {
    return run(kind, args);
  } catch (const gbp::DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDivergence;
  } catch (const gbp::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
