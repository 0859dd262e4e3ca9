#include <doctest.h>

#include <cmath>

#include "fmcsc/errors.hpp"
#include "fmcsc/server.hpp"

using namespace fmcsc;

namespace {

ModelShape tiny_shape() {
  ModelShape s;
  s.view_dims = {5, 4};
  s.encoder_hidden = {6};
  s.latent_dim = 3;
  s.head_hidden = 4;
  s.common_dim = 3;
  return s;
}

ClientUpdate multi_update(int id, double contrast, std::size_t samples,
                          std::uint64_t seed) {
  ModelShape shape = tiny_shape();
  Rng rng(seed);
  ClientUpdate u;
  u.client_id = id;
  u.kind = ClientKind::kMultiView;
  u.multi = make_multi_view_model(shape, rng);
  for (std::size_t v = 0; v < shape.view_dims.size(); ++v)
    u.replicas.push_back(make_single_view_model(shape, v, rng));
  u.weight_statistic = contrast;
  u.sample_count = samples;
  return u;
}

ClientUpdate single_update(int id, std::size_t view, double contrast,
                           std::uint64_t seed) {
  ModelShape shape = tiny_shape();
  Rng rng(seed);
  ClientUpdate u;
  u.client_id = id;
  u.kind = ClientKind::kSingleView;
  u.view_index = view;
  u.single = make_single_view_model(shape, view, rng);
  u.weight_statistic = contrast;
  u.sample_count = 40;
  return u;
}

void fill_bundle(std::vector<Tensor*> tensors, float value) {
  for (Tensor* t : tensors)
    for (auto& x : t->data) x = value;
}

double weight_of(const std::vector<WeightEntry>& group, int client_id, bool replica) {
  for (const auto& e : group)
    if (e.client_id == client_id && e.is_replica == replica) return e.weight;
  FAIL("missing weight entry");
  return 0.0;
}

}  // namespace

TEST_CASE("softmax weights match the direct evaluation") {
  // Two single-view clients with consistency losses 0.2 and 0.4, delta = 1:
  // scores -0.4 and -0.8 -> softmax (0.599, 0.401).
  std::vector<ClientUpdate> updates;
  updates.push_back(multi_update(0, 0.3, 40, 1));
  updates.push_back(single_update(1, 0, 0.2, 2));
  updates.push_back(single_update(2, 0, 0.4, 3));
  auto w = compute_weights(updates, 2, {});
  double w1 = weight_of(w.view_groups[0], 1, false);
  double w2 = weight_of(w.view_groups[0], 2, false);
  CHECK(w1 / (w1 + w2) == doctest::Approx(0.599).epsilon(1e-3));
  CHECK(w2 / (w1 + w2) == doctest::Approx(0.401).epsilon(1e-3));
}

TEST_CASE("every group sums to one and a singleton gets weight one") {
  std::vector<ClientUpdate> updates;
  updates.push_back(multi_update(0, 0.5, 30, 4));
  updates.push_back(single_update(3, 1, 0.7, 5));
  auto w = compute_weights(updates, 2, {});
  REQUIRE(w.multi_group.size() == 1);
  CHECK(w.multi_group[0].weight == doctest::Approx(1.0).epsilon(1e-9));
  double sum0 = 0.0, sum1 = 0.0;
  for (const auto& e : w.view_groups[0]) sum0 += e.weight;
  for (const auto& e : w.view_groups[1]) sum1 += e.weight;
  CHECK(sum0 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sum1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("identical statistics give uniform weights") {
  std::vector<ClientUpdate> updates;
  updates.push_back(multi_update(0, 0.3, 40, 1));
  updates.push_back(multi_update(1, 0.3, 40, 2));
  updates.push_back(multi_update(2, 0.3, 40, 3));
  auto w = compute_weights(updates, 2, {});
  for (const auto& e : w.multi_group)
    CHECK(e.weight == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("lower consistency loss gives strictly higher weight") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    double l1 = rng.uniform(0.0, 2.0);
    double l2 = rng.uniform(0.0, 2.0);
    if (l1 == l2) continue;
    std::vector<ClientUpdate> updates;
    updates.push_back(multi_update(0, l1, 50, trial * 2 + 1));
    updates.push_back(multi_update(1, l2, 50, trial * 2 + 2));
    auto w = compute_weights(updates, 2, {});
    double w1 = weight_of(w.multi_group, 0, true);
    double w2 = weight_of(w.multi_group, 1, true);
    if (l1 < l2) CHECK(w1 > w2);
    else CHECK(w2 > w1);
  }
}

TEST_CASE("uniform option ignores scores") {
  std::vector<ClientUpdate> updates;
  updates.push_back(multi_update(0, 0.1, 40, 1));
  updates.push_back(multi_update(1, 5.0, 10, 2));
  WeightingOptions opts;
  opts.uniform = true;
  auto w = compute_weights(updates, 2, opts);
  for (const auto& e : w.multi_group) CHECK(e.weight == doctest::Approx(0.5));
}

TEST_CASE("per-type normalization splits mass by member count") {
  std::vector<ClientUpdate> updates;
  updates.push_back(multi_update(0, 0.3, 40, 1));
  updates.push_back(single_update(1, 0, 0.2, 2));
  updates.push_back(single_update(2, 0, 0.9, 3));
  WeightingOptions opts;
  opts.per_type_normalization = true;
  auto w = compute_weights(updates, 2, opts);
  // View-0 group: one replica + two singles -> replica mass 1/3, singles 2/3.
  CHECK(weight_of(w.view_groups[0], 0, true) == doctest::Approx(1.0 / 3).epsilon(1e-9));
  double singles = weight_of(w.view_groups[0], 1, false) +
                   weight_of(w.view_groups[0], 2, false);
  CHECK(singles == doctest::Approx(2.0 / 3).epsilon(1e-9));
}

TEST_CASE("weight computation contract errors") {
  std::vector<ClientUpdate> none;
  CHECK_THROWS_AS(compute_weights(none, 2, {}), ProtocolError);
  std::vector<ClientUpdate> only_single;
  only_single.push_back(single_update(0, 0, 0.5, 1));
  CHECK_THROWS_AS(compute_weights(only_single, 2, {}), ProtocolError);
  std::vector<ClientUpdate> nonfinite;
  nonfinite.push_back(multi_update(0, std::nan(""), 40, 1));
  CHECK_THROWS_AS(compute_weights(nonfinite, 2, {}), ProtocolError);
}

TEST_CASE("aggregating identical bundles is the identity") {
  std::vector<ClientUpdate> updates;
  updates.push_back(multi_update(0, 0.1, 40, 7));
  updates.push_back(multi_update(1, 0.9, 10, 8));
  // Make every upload carry the same parameters.
  *updates[1].multi = *updates[0].multi;
  updates[1].replicas = updates[0].replicas;
  auto w = compute_weights(updates, 2, {});
  auto globals = aggregate(updates, w);
  auto got = bundle_tensors(std::as_const(globals.multi));
  auto want = bundle_tensors(std::as_const(*updates[0].multi));
  for (std::size_t i = 0; i < got.size(); ++i)
    for (std::size_t j = 0; j < got[i]->size(); ++j)
      CHECK(got[i]->data[j] == doctest::Approx(want[i]->data[j]).epsilon(1e-7));
}

TEST_CASE("weighted mean matches the scalar oracle") {
  // Weights (0.25, 0.75) on parameters (0, 4) -> every coordinate 3.
  std::vector<ClientUpdate> updates;
  updates.push_back(multi_update(0, 0.0, 40, 9));
  updates.push_back(multi_update(1, 0.0, 40, 10));
  fill_bundle(bundle_tensors(*updates[0].multi), 0.0f);
  fill_bundle(bundle_tensors(*updates[1].multi), 4.0f);
  for (auto& r : updates[0].replicas) fill_bundle(bundle_tensors(r), 0.0f);
  for (auto& r : updates[1].replicas) fill_bundle(bundle_tensors(r), 4.0f);

  AggregationWeights w;
  w.multi_group = {{0, true, 0.0, 0.25}, {1, true, 0.0, 0.75}};
  w.view_groups = {{{0, true, 0.0, 0.25}, {1, true, 0.0, 0.75}},
                   {{0, true, 0.0, 0.25}, {1, true, 0.0, 0.75}}};
  auto globals = aggregate(updates, w);
  for (const Tensor* t : bundle_tensors(std::as_const(globals.multi)))
    for (float x : t->data) CHECK(x == doctest::Approx(3.0).epsilon(1e-7));
  for (const auto& pv : globals.per_view)
    for (const Tensor* t : bundle_tensors(pv))
      for (float x : t->data) CHECK(x == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("aggregation rejects incongruent bundles") {
  std::vector<ClientUpdate> updates;
  updates.push_back(multi_update(0, 0.0, 40, 11));
  updates.push_back(multi_update(1, 0.0, 40, 12));
  updates[1].multi->fused_head.layers[0].weight = Tensor(2, 2);
  auto w = compute_weights(updates, 2, {});
  CHECK_THROWS_AS(aggregate(updates, w), ProtocolError);
}

TEST_CASE("dp noise: disabled config is a bit-identical pass-through") {
  auto u = multi_update(0, 0.2, 40, 13);
  auto before = u;
  DpConfig cfg;
  cfg.enabled = false;
  apply_dp_noise(u, cfg, Rng(1));
  auto a = bundle_tensors(std::as_const(*u.multi));
  auto b = bundle_tensors(std::as_const(*before.multi));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->data == b[i]->data);
}

TEST_CASE("dp noise clips to the configured norm") {
  auto u = single_update(0, 0, 0.2, 14);
  // Scale the bundle to norm 2C, then clip with negligible noise.
  double norm = 0.0;
  for (const Tensor* t : bundle_tensors(std::as_const(*u.single)))
    norm += squared_frobenius(*t);
  norm = std::sqrt(norm);
  const double clip = 1.5;
  float factor = static_cast<float>(2.0 * clip / norm);
  for (Tensor* t : bundle_tensors(*u.single))
    for (auto& x : t->data) x *= factor;

  DpConfig cfg;
  cfg.enabled = true;
  cfg.epsilon = 1e12;  // makes the Laplace scale negligible
  cfg.clip_norm = clip;
  apply_dp_noise(u, cfg, Rng(2));
  double post = 0.0;
  for (const Tensor* t : bundle_tensors(std::as_const(*u.single)))
    post += squared_frobenius(*t);
  CHECK(std::sqrt(post) == doctest::Approx(clip).epsilon(1e-4));
}

TEST_CASE("dp noise is deterministic in the seed and validates config") {
  auto u1 = single_update(0, 0, 0.2, 15);
  auto u2 = u1;
  DpConfig cfg;
  cfg.enabled = true;
  cfg.epsilon = 10.0;
  cfg.clip_norm = 1.0;
  apply_dp_noise(u1, cfg, Rng(7));
  apply_dp_noise(u2, cfg, Rng(7));
  CHECK(u1.single->encoder.layers[0].weight.data ==
        u2.single->encoder.layers[0].weight.data);
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(apply_dp_noise(u1, cfg, Rng(7)), ConfigError);
}

TEST_CASE("consensus selection picks the lowest-id multi-view upload") {
  std::vector<ClientUpdate> updates;
  updates.push_back(single_update(0, 0, 0.1, 16));
  updates.push_back(multi_update(3, 0.1, 40, 17));
  updates.push_back(multi_update(1, 0.1, 40, 18));
  CHECK(select_consensus_upload(updates).client_id == 1);
  std::vector<ClientUpdate> only_single;
  only_single.push_back(single_update(0, 0, 0.1, 19));
  CHECK_THROWS_AS(select_consensus_upload(only_single), ProtocolError);
}

TEST_CASE("consensus init averages autoencoders and keeps V+1 globals") {
  std::vector<ClientUpdate> updates;
  updates.push_back(multi_update(0, 0.0, 40, 20));
  updates.push_back(multi_update(1, 0.0, 40, 21));
  updates.push_back(single_update(2, 0, 0.0, 22));
  auto globals = consensus_init(updates, 2);
  CHECK(globals.per_view.size() == 2);
  // View 1 has two contributors (the multi-view clients); check one entry.
  float a = updates[0].multi->encoders[1].layers[0].weight.data[0];
  float b = updates[1].multi->encoders[1].layers[0].weight.data[0];
  CHECK(globals.per_view[1].encoder.layers[0].weight.data[0] ==
        doctest::Approx(0.5 * (a + b)).epsilon(1e-6));
  // View 0 additionally includes the single-view upload.
  float c = updates[2].single->encoder.layers[0].weight.data[0];
  float a0 = updates[0].multi->encoders[0].layers[0].weight.data[0];
  float b0 = updates[1].multi->encoders[0].layers[0].weight.data[0];
  CHECK(globals.per_view[0].encoder.layers[0].weight.data[0] ==
        doctest::Approx((a0 + b0 + c) / 3.0).epsilon(1e-6));
  // The multi-view global shares the averaged autoencoders and the designated
  // client's heads.
  CHECK(globals.multi.encoders[0].layers[0].weight.data ==
        globals.per_view[0].encoder.layers[0].weight.data);
  CHECK(globals.multi.fused_head.layers[0].weight.data ==
        updates[0].multi->fused_head.layers[0].weight.data);
}
