#pragma once

#include <vector>

#include "fmcsc/rng.hpp"
#include "fmcsc/tensor.hpp"

namespace fmcsc {

enum class Activation { kRelu, kIdentity };

struct DenseLayer {
  Tensor weight;  // in × out
  Tensor bias;    // 1 × out
  Activation act = Activation::kIdentity;
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  std::size_t in_dim() const { return layers.empty() ? 0 : layers.front().weight.rows; }
  std::size_t out_dim() const { return layers.empty() ? 0 : layers.back().weight.cols; }
};

// Glorot-uniform weights, zero biases; relu on hidden layers, identity on the
// last (features are unbounded reals).
MlpParams make_mlp(const std::vector<std::size_t>& dims, Rng& rng);

struct LayerGrads {
  Tensor weight;
  Tensor bias;
};

struct MlpGrads {
  std::vector<LayerGrads> layers;
};

MlpGrads zero_grads_like(const MlpParams& params);
void accumulate(MlpGrads& into, const MlpGrads& g);
void scale(MlpGrads& g, float factor);

// Activation trace from a forward pass; consumed by mlp_backward.
struct ForwardCache {
  std::vector<Tensor> inputs;  // input to layer k (inputs[0] is the batch)
  std::vector<Tensor> preact;  // pre-activation output of layer k
};

Tensor mlp_forward(const MlpParams& params, const Tensor& batch,
                   ForwardCache* cache = nullptr);

// Returns grad wrt the batch; fills grads (shape-congruent with params) when
// non-null. relu derivative at exactly 0 is 0.
Tensor mlp_backward(const MlpParams& params, const ForwardCache& cache,
                    const Tensor& grad_output, MlpGrads* grads);

bool congruent(const MlpParams& a, const MlpParams& b);

// Flat views over a model's parameter tensors, in a fixed traversal order
// (weight, bias per layer). Used by Adam, aggregation, and serialization.
std::vector<Tensor*> parameter_tensors(MlpParams& p);
std::vector<const Tensor*> parameter_tensors(const MlpParams& p);
std::vector<Tensor*> gradient_tensors(MlpGrads& g);
std::vector<const Tensor*> gradient_tensors(const MlpGrads& g);

}  // namespace fmcsc
