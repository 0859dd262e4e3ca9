#include "fmcsc/server.hpp"

#include <algorithm>
#include <cmath>

#include "fmcsc/errors.hpp"

namespace fmcsc {

double AggregationWeights::min_weight() const {
  double m = 1.0;
  for (const auto& e : multi_group) m = std::min(m, e.weight);
  for (const auto& g : view_groups)
    for (const auto& e : g) m = std::min(m, e.weight);
  return m;
}

double AggregationWeights::max_weight() const {
  double m = 0.0;
  for (const auto& e : multi_group) m = std::max(m, e.weight);
  for (const auto& g : view_groups)
    for (const auto& e : g) m = std::max(m, e.weight);
  return m;
}

namespace {

void softmax_in_place(std::vector<WeightEntry>& group) {
  if (group.empty()) return;
  double max_score = group.front().score;
  for (const auto& e : group) max_score = std::max(max_score, e.score);
  double denom = 0.0;
  for (auto& e : group) {
    e.weight = std::exp(e.score - max_score);
    denom += e.weight;
  }
  for (auto& e : group) e.weight /= denom;
}

void normalize_group(std::vector<WeightEntry>& group, bool per_type, bool uniform) {
  if (group.empty()) return;
  if (uniform) {
    double w = 1.0 / static_cast<double>(group.size());
    for (auto& e : group) e.weight = w;
    return;
  }
  if (!per_type) {
    softmax_in_place(group);
    return;
  }
  // Softmax within each type; a type's total mass is its member fraction.
  std::vector<WeightEntry*> replicas, singles;
  for (auto& e : group) (e.is_replica ? replicas : singles).push_back(&e);
  for (auto* part : {&replicas, &singles}) {
    if (part->empty()) continue;
    double max_score = (*part)[0]->score;
    for (auto* e : *part) max_score = std::max(max_score, e->score);
    double denom = 0.0;
    for (auto* e : *part) {
      e->weight = std::exp(e->score - max_score);
      denom += e->weight;
    }
    double mass = static_cast<double>(part->size()) / static_cast<double>(group.size());
    for (auto* e : *part) e->weight = e->weight / denom * mass;
  }
}

std::vector<const ClientUpdate*> sorted_by_id(const std::vector<ClientUpdate>& updates) {
  std::vector<const ClientUpdate*> out;
  for (const auto& u : updates) out.push_back(&u);
  std::sort(out.begin(), out.end(),
            [](const ClientUpdate* a, const ClientUpdate* b) {
              return a->client_id < b->client_id;
            });
  return out;
}

double multi_score(const ClientUpdate& u, std::size_t num_views, double delta_m) {
  return static_cast<double>(num_views) *
             std::log(static_cast<double>(std::max<std::size_t>(u.sample_count, 1))) -
         delta_m * u.weight_statistic;
}

template <class Model>
Model weighted_sum(const std::vector<std::pair<const Model*, double>>& parts) {
  if (parts.empty()) throw ProtocolError("aggregate: empty aggregation group");
  Model out = *parts.front().first;
  auto out_tensors = bundle_tensors(out);
  for (Tensor* t : out_tensors)
    for (auto& x : t->data) x *= static_cast<float>(parts.front().second);
  for (std::size_t p = 1; p < parts.size(); ++p) {
    if (!congruent(*parts[p].first, out))
      throw ProtocolError("aggregate: bundle architecture mismatch within group");
    auto src = bundle_tensors(*parts[p].first);
    float w = static_cast<float>(parts[p].second);
    for (std::size_t t = 0; t < src.size(); ++t) axpy(*out_tensors[t], w, *src[t]);
  }
  return out;
}

}  // namespace

AggregationWeights compute_weights(const std::vector<ClientUpdate>& updates,
                                   std::size_t num_views, const WeightingOptions& opts) {
  AggregationWeights weights;
  weights.delta_m = opts.delta_m;
  weights.delta_p = opts.delta_p;
  weights.view_groups.resize(num_views);

  for (const ClientUpdate* u : sorted_by_id(updates)) {
    if (!std::isfinite(u->weight_statistic))
      throw ProtocolError("compute_weights: non-finite weight statistic from client " +
                          std::to_string(u->client_id));
    if (u->kind == ClientKind::kMultiView) {
      double s = multi_score(*u, num_views, opts.delta_m);
      weights.multi_group.push_back({u->client_id, true, s, 0.0});
      for (std::size_t v = 0; v < num_views; ++v)
        weights.view_groups[v].push_back({u->client_id, true, s, 0.0});
    } else {
      if (u->view_index >= num_views)
        throw ProtocolError("compute_weights: view index out of range");
      double s = -2.0 * opts.delta_p * u->weight_statistic;
      weights.view_groups[u->view_index].push_back({u->client_id, false, s, 0.0});
    }
  }

  if (weights.multi_group.empty())
    throw ProtocolError("compute_weights: no multi-view update in the round");
  for (std::size_t v = 0; v < num_views; ++v)
    if (weights.view_groups[v].empty())
      throw ProtocolError("compute_weights: empty aggregation group for view " +
                          std::to_string(v));

  normalize_group(weights.multi_group, false, opts.uniform);
  for (auto& g : weights.view_groups)
    normalize_group(g, opts.per_type_normalization, opts.uniform);
  return weights;
}

GlobalModels aggregate(const std::vector<ClientUpdate>& updates,
                       const AggregationWeights& weights) {
  auto find = [&](int client_id) -> const ClientUpdate& {
    for (const auto& u : updates)
      if (u.client_id == client_id) return u;
    throw ProtocolError("aggregate: weight refers to unknown client " +
                        std::to_string(client_id));
  };

  GlobalModels globals;
  {
    std::vector<std::pair<const MultiViewModel*, double>> parts;
    for (const auto& e : weights.multi_group) {
      const ClientUpdate& u = find(e.client_id);
      if (!u.multi) throw ProtocolError("aggregate: multi-view upload missing f_m");
      parts.emplace_back(&*u.multi, e.weight);
    }
    globals.multi = weighted_sum(parts);
  }
  for (std::size_t v = 0; v < weights.view_groups.size(); ++v) {
    std::vector<std::pair<const SingleViewModel*, double>> parts;
    for (const auto& e : weights.view_groups[v]) {
      const ClientUpdate& u = find(e.client_id);
      if (e.is_replica) {
        if (u.replicas.size() <= v)
          throw ProtocolError("aggregate: multi-view upload missing replica for view " +
                              std::to_string(v));
        parts.emplace_back(&u.replicas[v], e.weight);
      } else {
        if (!u.single) throw ProtocolError("aggregate: single-view upload missing f_p");
        parts.emplace_back(&*u.single, e.weight);
      }
    }
    globals.per_view.push_back(weighted_sum(parts));
  }
  return globals;
}

namespace {

void clip_and_noise(std::vector<Tensor*> bundle, const DpConfig& cfg, Rng rng) {
  double sq = 0.0;
  for (const Tensor* t : bundle) sq += squared_frobenius(*t);
  double norm = std::sqrt(sq);
  double scale = norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;
  double noise_scale = 2.0 * cfg.clip_norm / cfg.epsilon;
  for (Tensor* t : bundle)
    for (auto& x : t->data)
      x = static_cast<float>(static_cast<double>(x) * scale + rng.laplace(noise_scale));
}

}  // namespace

void apply_dp_noise(ClientUpdate& update, const DpConfig& cfg, Rng rng) {
  if (!cfg.enabled) return;
  if (cfg.epsilon <= 0.0) throw ConfigError("apply_dp_noise: epsilon must be > 0");
  if (cfg.clip_norm <= 0.0) throw ConfigError("apply_dp_noise: clip_norm must be > 0");
  std::uint64_t stream = 0;
  if (update.multi) clip_and_noise(bundle_tensors(*update.multi), cfg, rng.stream(stream++));
  for (auto& replica : update.replicas)
    clip_and_noise(bundle_tensors(replica), cfg, rng.stream(stream++));
  if (update.single)
    clip_and_noise(bundle_tensors(*update.single), cfg, rng.stream(stream++));
}

const ClientUpdate& select_consensus_upload(const std::vector<ClientUpdate>& updates) {
  const ClientUpdate* best = nullptr;
  for (const auto& u : updates)
    if (u.kind == ClientKind::kMultiView && u.multi)
      if (!best || u.client_id < best->client_id) best = &u;
  if (!best)
    throw ProtocolError("consensus: no multi-view client upload present");
  return *best;
}

GlobalModels consensus_init(const std::vector<ClientUpdate>& pretrained,
                            std::size_t num_views) {
  const ClientUpdate& designated = select_consensus_upload(pretrained);
  const MultiViewModel& base = *designated.multi;
  if (base.encoders.size() != num_views)
    throw ProtocolError("consensus_init: designated upload has wrong view count");

  GlobalModels globals;
  globals.multi = base;
  // Uniform average of the pre-trained autoencoders within each group; heads
  // come from the designated client (nothing has trained them yet).
  for (std::size_t v = 0; v < num_views; ++v) {
    std::vector<std::pair<const MlpParams*, double>> encs, decs;
    for (const ClientUpdate* u : sorted_by_id(pretrained)) {
      if (u->kind == ClientKind::kMultiView && u->multi) {
        encs.emplace_back(&u->multi->encoders[v], 0.0);
        decs.emplace_back(&u->multi->decoders[v], 0.0);
      } else if (u->kind == ClientKind::kSingleView && u->single &&
                 u->view_index == v) {
        encs.emplace_back(&u->single->encoder, 0.0);
        decs.emplace_back(&u->single->decoder, 0.0);
      }
    }
    double w = 1.0 / static_cast<double>(encs.size());
    for (auto& p : encs) p.second = w;
    for (auto& p : decs) p.second = w;

    auto average_mlp = [](const std::vector<std::pair<const MlpParams*, double>>& parts) {
      MlpParams out = *parts.front().first;
      auto out_tensors = parameter_tensors(out);
      for (Tensor* t : out_tensors)
        for (auto& x : t->data) x *= static_cast<float>(parts.front().second);
      for (std::size_t p = 1; p < parts.size(); ++p) {
        auto src = parameter_tensors(*parts[p].first);
        for (std::size_t t = 0; t < src.size(); ++t)
          axpy(*out_tensors[t], static_cast<float>(parts[p].second), *src[t]);
      }
      return out;
    };

    SingleViewModel pv;
    pv.encoder = average_mlp(encs);
    pv.decoder = average_mlp(decs);
    pv.view_head = base.view_heads[v];
    pv.common_head = base.view_heads[v];
    globals.per_view.push_back(std::move(pv));

    // The multi-view global shares the averaged autoencoders.
    globals.multi.encoders[v] = globals.per_view[v].encoder;
    globals.multi.decoders[v] = globals.per_view[v].decoder;
  }
  return globals;
}

}  // namespace fmcsc
