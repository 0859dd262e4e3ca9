#include "fmcsc/partition.hpp"

#include <algorithm>
#include <numeric>

#include "fmcsc/errors.hpp"

namespace fmcsc {

std::vector<ClientShard> partition(const MultiViewDataset& ds, const PartitionConfig& cfg) {
  std::size_t n = ds.num_samples();
  std::size_t num_clients = cfg.num_multi_clients + cfg.num_single_clients;
  if (cfg.num_multi_clients < 1)
    throw ConfigError("partition: need at least one multi-view client");
  if (num_clients > n)
    throw ConfigError("partition: more clients (" + std::to_string(num_clients) +
                      ") than samples (" + std::to_string(n) + ")");
  if (!cfg.iid() && cfg.dirichlet_beta <= 0.0)
    throw ConfigError("partition: dirichlet_beta must be > 0");
  if (cfg.participation_rate <= 0.0 || cfg.participation_rate > 1.0)
    throw ConfigError("partition: participation_rate must be in (0,1]");
  if (!cfg.single_view_assignment.empty() &&
      cfg.single_view_assignment.size() != cfg.num_single_clients)
    throw ConfigError("partition: single_view_assignment length mismatch");
  for (std::size_t v : cfg.single_view_assignment)
    if (v >= ds.num_views())
      throw ConfigError("partition: view index " + std::to_string(v) + " out of range");

  Rng rng(cfg.seed);

  std::vector<ClientShard> shards(num_clients);
  for (std::size_t c = 0; c < num_clients; ++c) {
    shards[c].client_id = static_cast<int>(c);
    if (c < cfg.num_multi_clients) {
      shards[c].kind = ClientKind::kMultiView;
    } else {
      shards[c].kind = ClientKind::kSingleView;
      std::size_t s = c - cfg.num_multi_clients;
      shards[c].view_index = cfg.single_view_assignment.empty()
                                 ? s % ds.num_views()
                                 : cfg.single_view_assignment[s];
    }
  }

  // Equal sample counts ±1.
  std::vector<std::size_t> capacity(num_clients, n / num_clients);
  for (std::size_t c = 0; c < n % num_clients; ++c) capacity[c] += 1;

  if (cfg.iid()) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    Rng shuffle_rng = rng.stream("assign");
    shuffle_rng.shuffle(order);
    std::size_t pos = 0;
    for (std::size_t c = 0; c < num_clients; ++c)
      for (std::size_t k = 0; k < capacity[c]; ++k)
        shards[c].sample_indices.push_back(order[pos++]);
  } else {
    // Per-class Dirichlet proportions over clients, then greedy assignment
    // honoring the per-client capacity caps.
    std::size_t num_classes = std::max<std::uint32_t>(ds.num_classes, 1);
    std::vector<std::vector<std::uint32_t>> by_class(num_classes);
    for (std::uint32_t i = 0; i < n; ++i) by_class[ds.labels[i] % num_classes].push_back(i);
    Rng class_rng = rng.stream("dirichlet");
    std::vector<std::size_t> remaining = capacity;
    for (std::size_t k = 0; k < num_classes; ++k) {
      auto props = class_rng.dirichlet(num_clients, cfg.dirichlet_beta);
      class_rng.shuffle(by_class[k]);
      std::vector<double> desired(num_clients);
      for (std::size_t c = 0; c < num_clients; ++c)
        desired[c] = props[c] * static_cast<double>(by_class[k].size());
      for (std::uint32_t idx : by_class[k]) {
        std::size_t best = num_clients;
        double best_score = -1e300;
        for (std::size_t c = 0; c < num_clients; ++c) {
          if (remaining[c] == 0) continue;
          if (desired[c] > best_score) {
            best_score = desired[c];
            best = c;
          }
        }
        if (best == num_clients) throw ConfigError("partition: capacity exhausted");
        shards[best].sample_indices.push_back(idx);
        desired[best] -= 1.0;
        remaining[best] -= 1;
      }
    }
    for (auto& shard : shards)
      std::sort(shard.sample_indices.begin(), shard.sample_indices.end());
  }

  resample_participation(shards, cfg.participation_rate, rng.stream("participation"));
  return shards;
}

Tensor shard_view(const MultiViewDataset& ds, const ClientShard& shard, std::size_t v) {
  if (shard.kind == ClientKind::kSingleView && v != shard.view_index)
    throw ProtocolError("shard_view: single-view shard only exposes view " +
                        std::to_string(shard.view_index));
  if (v >= ds.num_views()) throw ProtocolError("shard_view: view index out of range");
  const Tensor& src = ds.views[v];
  Tensor out(shard.sample_indices.size(), src.cols);
  for (std::size_t i = 0; i < shard.sample_indices.size(); ++i)
    for (std::size_t j = 0; j < src.cols; ++j)
      out(i, j) = src(shard.sample_indices[i], j);
  return out;
}

void resample_participation(std::vector<ClientShard>& shards, double rate, Rng rng) {
  bool any_multi = false;
  for (auto& shard : shards) {
    shard.participates = rng.uniform() < rate;
    if (shard.participates && shard.kind == ClientKind::kMultiView) any_multi = true;
  }
  if (!any_multi) {
    for (auto& shard : shards) {
      if (shard.kind == ClientKind::kMultiView) {
        shard.participates = true;
        break;
      }
    }
  }
}

}  // namespace fmcsc
