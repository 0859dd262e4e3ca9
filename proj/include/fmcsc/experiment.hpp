#pragma once

#include "fmcsc/client.hpp"
#include "fmcsc/cluster.hpp"
#include "fmcsc/config.hpp"
#include "fmcsc/server.hpp"

namespace fmcsc {

struct MetricsRow {
  std::size_t round = 0;  // 0 = post-pre-training baseline
  double acc = 0.0, nmi = 0.0, ari = 0.0;
  double mean_recon_loss_mv = 0.0, mean_contrast_loss_mv = 0.0;
  double mean_recon_loss_sv = 0.0, mean_contrast_loss_sv = 0.0;
  double min_weight = 0.0, max_weight = 0.0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;  // rounds + 1 entries
  std::string config_text;       // normalized echo
  std::uint64_t seed = 0;
  double wall_time_seconds = 0.0;  // informational; never serialized
  Tensor embedding;                // pooled 2-D PCA of the final common semantics
  std::vector<std::uint32_t> pred_labels;
  std::vector<std::uint32_t> true_labels;

  const MetricsRow& final_row() const { return rows.back(); }
};

// Full pipeline: data, partition, pre-training (with optional consensus
// broadcast), federated rounds with weighting/aggregation, per-round pooled
// clustering. Deterministic in (dataset bytes, config).
MetricsReport run_experiment(const ExperimentConfig& cfg);
MetricsReport run_experiment(const ExperimentConfig& cfg, const MultiViewDataset& ds);

// Writes metrics.csv, config.echo, and embedding.csv into dir.
void emit_report(const MetricsReport& report, const std::filesystem::path& dir);

// metrics.csv body as a string (header + one row per entry, full precision).
std::string metrics_csv(const MetricsReport& report);

}  // namespace fmcsc
