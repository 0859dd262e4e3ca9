#include "fmcsc/losses.hpp"

#include <algorithm>
#include <cmath>

#include "fmcsc/errors.hpp"

namespace fmcsc {

namespace {

double floored_row_norm(const Tensor& t, std::size_t i) {
  return std::max(row_norm(t, i), kNormFloor);
}

// Accumulates g * d cos(a_i, b_j) / d a_i into da row i, and the symmetric
// term into db row j.
void add_cosine_grad(const Tensor& a, std::size_t i, double na, const Tensor& b,
                     std::size_t j, double nb, double sim, double g, Tensor& da,
                     Tensor& db) {
  double inv = 1.0 / (na * nb);
  for (std::size_t k = 0; k < a.cols; ++k) {
    double ak = a(i, k), bk = b(j, k);
    da(i, k) += static_cast<float>(g * (bk * inv - sim * ak / (na * na)));
    db(j, k) += static_cast<float>(g * (ak * inv - sim * bk / (nb * nb)));
  }
}

}  // namespace

FeatureContrastResult feature_contrastive_loss(const Tensor& common,
                                               std::span<const Tensor> views,
                                               double tau) {
  std::size_t batch = common.rows;
  if (batch < 2)
    throw ProtocolError("feature_contrastive_loss: batch size must be >= 2");
  if (tau <= 0.0) throw ConfigError("feature_contrastive_loss: tau must be > 0");

  FeatureContrastResult out;
  out.grad_common = Tensor(common.rows, common.cols);
  for (const auto& v : views) {
    if (!v.same_shape(common))
      throw ShapeError("feature_contrastive_loss: view/common shape mismatch");
    out.grad_views.emplace_back(v.rows, v.cols);
  }

  std::vector<double> norm_common(batch);
  for (std::size_t i = 0; i < batch; ++i) norm_common[i] = floored_row_norm(common, i);

  double loss = 0.0;
  std::vector<double> sims(batch * batch), probs(batch * batch), norm_view(batch);
  for (std::size_t v = 0; v < views.size(); ++v) {
    const Tensor& hv = views[v];
    for (std::size_t j = 0; j < batch; ++j) norm_view[j] = floored_row_norm(hv, j);
    for (std::size_t i = 0; i < batch; ++i) {
      double max_logit = -1e300;
      for (std::size_t j = 0; j < batch; ++j) {
        double s = row_dot(common, i, hv, j) / (norm_common[i] * norm_view[j]);
        sims[i * batch + j] = s;
        max_logit = std::max(max_logit, s / tau);
      }
      double denom = 0.0;
      for (std::size_t j = 0; j < batch; ++j) {
        double e = std::exp(sims[i * batch + j] / tau - max_logit);
        probs[i * batch + j] = e;
        denom += e;
      }
      for (std::size_t j = 0; j < batch; ++j) probs[i * batch + j] /= denom;
      loss -= std::log(std::max(probs[i * batch + i], 1e-300));
    }
    double inv_btau = 1.0 / (static_cast<double>(batch) * tau);
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t j = 0; j < batch; ++j) {
        double g = (probs[i * batch + j] - (i == j ? 1.0 : 0.0)) * inv_btau;
        add_cosine_grad(common, i, norm_common[i], hv, j, norm_view[j],
                        sims[i * batch + j], g, out.grad_common, out.grad_views[v]);
      }
  }
  out.loss = loss / static_cast<double>(batch);
  return out;
}

ModelContrastResult model_contrastive_loss(const Tensor& common,
                                           const Tensor& global_common,
                                           const Tensor& latent, double tau) {
  if (!common.same_shape(global_common))
    throw ShapeError("model_contrastive_loss: global output shape mismatch");
  if (latent.rows != common.rows || latent.cols != common.cols)
    throw ShapeError("model_contrastive_loss: latent dimension must equal common dimension");
  if (tau <= 0.0) throw ConfigError("model_contrastive_loss: tau must be > 0");

  std::size_t batch = common.rows;
  ModelContrastResult out;
  out.grad_common = Tensor(common.rows, common.cols);
  out.grad_latent = Tensor(latent.rows, latent.cols);
  Tensor grad_global(global_common.rows, global_common.cols);  // discarded

  double loss = 0.0;
  double inv_btau = 1.0 / (static_cast<double>(batch) * tau);
  for (std::size_t i = 0; i < batch; ++i) {
    double nc = floored_row_norm(common, i);
    double ng = floored_row_norm(global_common, i);
    double nz = floored_row_norm(latent, i);
    double sim_pos = row_dot(common, i, global_common, i) / (nc * ng);
    double sim_neg = row_dot(common, i, latent, i) / (nc * nz);
    double m = std::max(sim_pos, sim_neg) / tau;
    double ep = std::exp(sim_pos / tau - m);
    double en = std::exp(sim_neg / tau - m);
    double p_pos = ep / (ep + en);
    loss -= std::log(std::max(p_pos, 1e-300));
    add_cosine_grad(common, i, nc, global_common, i, ng, sim_pos,
                    (p_pos - 1.0) * inv_btau, out.grad_common, grad_global);
    add_cosine_grad(common, i, nc, latent, i, nz, sim_neg, (1.0 - p_pos) * inv_btau,
                    out.grad_common, out.grad_latent);
  }
  out.loss = loss / static_cast<double>(batch);
  return out;
}

}  // namespace fmcsc
