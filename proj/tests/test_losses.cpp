#include <doctest.h>

#include <cmath>

#include "fmcsc/errors.hpp"
#include "fmcsc/losses.hpp"
#include "fmcsc/rng.hpp"
#include "helpers.hpp"

using namespace fmcsc;

TEST_CASE("feature contrastive loss on the two-sample fixture") {
  // h1 = h1^1 = [1,0], h2 = h2^1 = [0,1], tau = 0.5:
  // positive sim 1, cross sim 0 -> per-sample loss log(1 + e^{-2}).
  Tensor common = Tensor::from_rows({{1, 0}, {0, 1}});
  std::vector<Tensor> views{common};
  auto res = feature_contrastive_loss(common, views, 0.5);
  CHECK(res.loss == doctest::Approx(std::log(1.0 + std::exp(-2.0))).epsilon(1e-6));
}

TEST_CASE("feature contrastive loss is scale invariant and nonnegative") {
  Rng rng(6);
  Tensor common(4, 3);
  for (auto& x : common.data) x = static_cast<float>(rng.uniform(-1, 1));
  Tensor view(4, 3);
  for (auto& x : view.data) x = static_cast<float>(rng.uniform(-1, 1));
  std::vector<Tensor> views{view};
  auto base = feature_contrastive_loss(common, views, 0.5);
  CHECK(base.loss >= 0.0);

  Tensor common3 = common;
  Tensor view3 = view;
  for (auto& x : common3.data) x *= 3.0f;
  for (auto& x : view3.data) x *= 3.0f;
  std::vector<Tensor> views3{view3};
  auto scaled = feature_contrastive_loss(common3, views3, 0.5);
  CHECK(scaled.loss == doctest::Approx(base.loss).epsilon(1e-5));
}

TEST_CASE("feature contrastive loss contract errors") {
  Tensor one(1, 2, 1.0f);
  std::vector<Tensor> views{one};
  CHECK_THROWS_AS(feature_contrastive_loss(one, views, 0.5), ProtocolError);
  Tensor two = Tensor::from_rows({{1, 0}, {0, 1}});
  std::vector<Tensor> v2{two};
  CHECK_THROWS_AS(feature_contrastive_loss(two, v2, 0.0), ConfigError);
  std::vector<Tensor> bad{Tensor(2, 3, 1.0f)};
  CHECK_THROWS_AS(feature_contrastive_loss(two, bad, 0.5), ShapeError);
}

TEST_CASE("model contrastive loss symmetric case equals log 2") {
  // global == latent == common direction -> both sims equal -> log 2.
  Tensor h = Tensor::from_rows({{1, 1}, {2, 0}});
  auto res = model_contrastive_loss(h, h, h, 0.5);
  CHECK(res.loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("model contrastive loss orthogonal fixture") {
  Tensor h = Tensor::from_rows({{1, 0}});
  Tensor g = h;                              // sim 1
  Tensor z = Tensor::from_rows({{0, 1}});    // sim 0
  auto res = model_contrastive_loss(h, g, z, 0.5);
  CHECK(res.loss == doctest::Approx(std::log(1.0 + std::exp(-2.0))).epsilon(1e-6));
}

TEST_CASE("model contrastive loss dimension contract") {
  Tensor h(2, 3, 1.0f), z(2, 4, 1.0f);
  CHECK_THROWS_AS(model_contrastive_loss(h, h, z, 0.5), ShapeError);
}

TEST_CASE("model contrastive loss never touches the global tensor") {
  Rng rng(8);
  Tensor h(3, 4), g(3, 4), z(3, 4);
  for (auto* t : {&h, &g, &z})
    for (auto& x : t->data) x = static_cast<float>(rng.uniform(-1, 1));
  Tensor g_before = g;
  auto res = model_contrastive_loss(h, g, z, 0.5);
  CHECK(g.data == g_before.data);
  CHECK(res.grad_common.same_shape(h));
  CHECK(res.grad_latent.same_shape(z));
}

TEST_CASE("feature contrastive gradients match finite differences") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Rng rng(seed);
    std::size_t b = 3, d = 4, v = 2;
    Tensor common(b, d);
    for (auto& x : common.data) x = static_cast<float>(rng.uniform(-1, 1));
    std::vector<Tensor> views(v, Tensor(b, d));
    for (auto& view : views)
      for (auto& x : view.data) x = static_cast<float>(rng.uniform(-1, 1));

    auto res = feature_contrastive_loss(common, views, 0.5);
    auto eval = [&] { return feature_contrastive_loss(common, views, 0.5).loss; };

    double worst = 0.0;
    for (std::size_t i = 0; i < common.size(); ++i) {
      double fd = testutil::central_diff(eval, common.data[i], 1e-4);
      worst = std::max(worst, testutil::rel_err(fd, res.grad_common.data[i]));
    }
    for (std::size_t k = 0; k < v; ++k)
      for (std::size_t i = 0; i < views[k].size(); ++i) {
        double fd = testutil::central_diff(eval, views[k].data[i], 1e-4);
        worst = std::max(worst, testutil::rel_err(fd, res.grad_views[k].data[i]));
      }
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("model contrastive gradients match finite differences") {
  for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
    Rng rng(seed);
    std::size_t b = 3, d = 4;
    Tensor h(b, d), g(b, d), z(b, d);
    for (auto* t : {&h, &g, &z})
      for (auto& x : t->data) x = static_cast<float>(rng.uniform(-1, 1));

    auto res = model_contrastive_loss(h, g, z, 0.5);
    auto eval = [&] { return model_contrastive_loss(h, g, z, 0.5).loss; };

    double worst = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      double fd = testutil::central_diff(eval, h.data[i], 1e-4);
      worst = std::max(worst, testutil::rel_err(fd, res.grad_common.data[i]));
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
      double fd = testutil::central_diff(eval, z.data[i], 1e-4);
      worst = std::max(worst, testutil::rel_err(fd, res.grad_latent.data[i]));
    }
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("one gradient step widens the similarity margin") {
  // Directional check: moving h along -grad increases sim(h, g) - sim(h, z).
  Tensor h = Tensor::from_rows({{0.8f, 0.3f}});
  Tensor g = Tensor::from_rows({{1.0f, 0.0f}});
  Tensor z = Tensor::from_rows({{0.0f, 1.0f}});
  auto margin = [&](const Tensor& hh) {
    return cosine_similarity(hh, g) - cosine_similarity(hh, z);
  };
  auto res = model_contrastive_loss(h, g, z, 0.5);
  double before = margin(h);
  Tensor stepped = h;
  axpy(stepped, -0.01f, res.grad_common);
  CHECK(margin(stepped) > before);
}
