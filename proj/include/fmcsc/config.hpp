#pragma once

#include <filesystem>
#include <string>

#include "fmcsc/dataset.hpp"
#include "fmcsc/model.hpp"
#include "fmcsc/server.hpp"

namespace fmcsc {

struct ExperimentConfig {
  // Data source: a dataset directory, or a synthetic spec when path is empty.
  std::string dataset_path;
  SyntheticSpec synthetic;

  PartitionConfig partition;

  std::size_t rounds = 5;
  std::size_t local_epochs = 25;
  std::size_t pretrain_epochs = 250;
  double learning_rate = 3e-4;
  std::size_t batch_size = 256;
  double tau_m = 0.5;
  double tau_p = 0.5;
  double delta_m = 1.0;
  double delta_p = 1.0;

  DpConfig dp;

  std::size_t num_clusters = 0;  // 0 → dataset's class count
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  // Ablation toggles.
  bool consensus_pretraining = true;
  bool component_b = true;          // global-replica distillation
  bool component_c = true;          // model contrast (off → global replacement)
  bool weighted_aggregation = true;  // off → uniform weights
  bool per_type_normalization = false;
  bool contrast_enabled = true;  // feature/model contrast terms altogether

  // Architecture overrides (defaults follow the reference setup).
  std::vector<std::size_t> encoder_hidden = {500, 500, 2000};
  std::size_t latent_dim = 20;
  std::size_t common_dim = 20;
  std::size_t head_hidden = 256;

  void validate() const;  // throws ConfigError
};

// Flat `key = value` file with dotted keys; '#' starts a comment. Unknown
// keys are errors.
ExperimentConfig parse_config_file(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

// Normalized round-trippable echo of a config (same key = value format).
std::string config_echo(const ExperimentConfig& cfg);

// Synthetic-spec-only file for the gen-synthetic subcommand (synthetic.* keys).
SyntheticSpec parse_synthetic_spec_file(const std::filesystem::path& path);

}  // namespace fmcsc
