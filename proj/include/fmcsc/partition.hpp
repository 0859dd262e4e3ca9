#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fmcsc/dataset.hpp"

namespace fmcsc {

enum class ClientKind { kMultiView, kSingleView };

// A client's slice of the sample index set. Shards of one partition are
// pairwise disjoint and cover [0, N). Labels are not reachable from here.
struct ClientShard {
  int client_id = 0;
  ClientKind kind = ClientKind::kMultiView;
  std::size_t view_index = 0;  // meaningful for single-view shards only
  std::vector<std::uint32_t> sample_indices;
  bool participates = true;
};

struct PartitionConfig {
  std::size_t num_multi_clients = 1;
  std::size_t num_single_clients = 0;
  // Per-single-client view index; empty means round-robin over views.
  std::vector<std::size_t> single_view_assignment;
  // Dirichlet concentration for label skew; infinity means IID.
  double dirichlet_beta = std::numeric_limits<double>::infinity();
  double participation_rate = 1.0;
  std::uint64_t seed = 0;

  bool iid() const { return !(dirichlet_beta < std::numeric_limits<double>::infinity()); }
};

std::vector<ClientShard> partition(const MultiViewDataset& ds, const PartitionConfig& cfg);

// The rows of view v visible to a shard, in shard order.
Tensor shard_view(const MultiViewDataset& ds, const ClientShard& shard, std::size_t v);

// Redraw participation flags (Bernoulli per client) forcing at least one
// multi-view participant; used at the start of every round.
void resample_participation(std::vector<ClientShard>& shards, double rate, Rng rng);

}  // namespace fmcsc
