#pragma once

#include <span>

#include "fmcsc/tensor.hpp"

namespace fmcsc {

// Norm floor used inside training losses so cosine similarity stays
// differentiable on near-zero features.
inline constexpr double kNormFloor = 1e-12;

// InfoNCE over cosine similarities between the fused common semantics H and
// each per-view projection H^v. Row i of H^v is the positive for row i of H;
// the denominator includes the positive pair. Requires batch size >= 2.
struct FeatureContrastResult {
  double loss = 0.0;
  Tensor grad_common;               // dL/dH
  std::vector<Tensor> grad_views;   // dL/dH^v
};

FeatureContrastResult feature_contrastive_loss(const Tensor& common,
                                               std::span<const Tensor> views,
                                               double tau);

// Two-way contrast pulling the local common semantics H toward the global
// model's output and away from the raw latent Z^v. The global side is a
// constant: no gradient is produced for it.
struct ModelContrastResult {
  double loss = 0.0;
  Tensor grad_common;  // dL/dH
  Tensor grad_latent;  // dL/dZ^v
};

ModelContrastResult model_contrastive_loss(const Tensor& common,
                                           const Tensor& global_common,
                                           const Tensor& latent, double tau);

}  // namespace fmcsc
