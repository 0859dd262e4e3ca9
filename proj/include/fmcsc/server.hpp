#pragma once

#include "fmcsc/model.hpp"

namespace fmcsc {

struct DpConfig {
  bool enabled = false;
  double epsilon = 0.0;    // privacy budget, > 0 when enabled
  double clip_norm = 1.0;  // L2 clip C applied to the flattened bundle
  std::uint64_t seed = 0;
};

// One softmax weight inside an aggregation group.
struct WeightEntry {
  int client_id = 0;
  bool is_replica = false;  // multi-view replica vs single-view upload
  double score = 0.0;
  double weight = 0.0;
};

// Softmax-normalized surrogate-score weights for every aggregation group:
// one group for the multi-view global, one per view type.
struct AggregationWeights {
  std::vector<WeightEntry> multi_group;
  std::vector<std::vector<WeightEntry>> view_groups;
  double delta_m = 1.0;
  double delta_p = 1.0;

  double min_weight() const;
  double max_weight() const;
};

struct WeightingOptions {
  double delta_m = 1.0;
  double delta_p = 1.0;
  // Normalize replica and single-view scores separately within each per-view
  // group, each type keeping mass proportional to its member count.
  bool per_type_normalization = false;
  // Ignore scores entirely (ablation of the weighted aggregation).
  bool uniform = false;
};

// Surrogate scores: multi-view client m gets V·log|M_m| − δ_m·L_c^m, a
// single-view client p gets −2·δ_p·L_c^p; weights are softmax within each
// group. Only participating uploads appear in `updates`.
AggregationWeights compute_weights(const std::vector<ClientUpdate>& updates,
                                   std::size_t num_views, const WeightingOptions& opts);

// Parameter-wise convex combination within each architecture-congruent
// group. Updates are consumed in ascending client_id order.
GlobalModels aggregate(const std::vector<ClientUpdate>& updates,
                       const AggregationWeights& weights);

// Flatten, L2-clip to clip_norm, then add i.i.d. Laplace(0, 2C/eps) noise to
// every uploaded bundle. Pass-through when disabled.
void apply_dp_noise(ClientUpdate& update, const DpConfig& cfg, Rng rng);

// Consensus pre-training support: the designated first (lowest-id
// participating) multi-view upload supplies the broadcast autoencoders.
const ClientUpdate& select_consensus_upload(const std::vector<ClientUpdate>& updates);

// Server-side initialization of the V+1 global models from the pre-trained
// uploads. Autoencoders are uniform averages within each architecture group;
// projection heads are taken from the designated multi-view client (they are
// untrained at this point).
GlobalModels consensus_init(const std::vector<ClientUpdate>& pretrained,
                            std::size_t num_views);

}  // namespace fmcsc
