#include "fmcsc/mlp.hpp"

#include <cmath>

#include "fmcsc/errors.hpp"

namespace fmcsc {

MlpParams make_mlp(const std::vector<std::size_t>& dims, Rng& rng) {
  if (dims.size() < 2) throw ConfigError("make_mlp: need at least input and output dims");
  MlpParams p;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    DenseLayer layer;
    std::size_t in = dims[k], out = dims[k + 1];
    layer.weight = Tensor(in, out);
    layer.bias = Tensor(1, out);
    double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (auto& w : layer.weight.data)
      w = static_cast<float>(rng.uniform(-bound, bound));
    layer.act = (k + 2 == dims.size()) ? Activation::kIdentity : Activation::kRelu;
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpGrads zero_grads_like(const MlpParams& params) {
  MlpGrads g;
  for (const auto& layer : params.layers)
    g.layers.push_back({Tensor(layer.weight.rows, layer.weight.cols),
                        Tensor(layer.bias.rows, layer.bias.cols)});
  return g;
}

void accumulate(MlpGrads& into, const MlpGrads& g) {
  if (into.layers.size() != g.layers.size())
    throw ShapeError("accumulate: layer count mismatch");
  for (std::size_t k = 0; k < g.layers.size(); ++k) {
    axpy(into.layers[k].weight, 1.0f, g.layers[k].weight);
    axpy(into.layers[k].bias, 1.0f, g.layers[k].bias);
  }
}

void scale(MlpGrads& g, float factor) {
  for (auto& layer : g.layers) {
    for (auto& v : layer.weight.data) v *= factor;
    for (auto& v : layer.bias.data) v *= factor;
  }
}

Tensor mlp_forward(const MlpParams& params, const Tensor& batch, ForwardCache* cache) {
  if (params.layers.empty()) throw ShapeError("mlp_forward: empty network");
  if (batch.cols != params.in_dim())
    throw ShapeError("mlp_forward: batch has " + std::to_string(batch.cols) +
                     " columns, layer 0 expects " + std::to_string(params.in_dim()));
  if (!all_finite(batch)) throw ShapeError("mlp_forward: non-finite batch");
  if (cache) {
    cache->inputs.clear();
    cache->preact.clear();
  }
  Tensor x = batch;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto& layer = params.layers[k];
    if (x.cols != layer.weight.rows)
      throw ShapeError("mlp_forward: dimension mismatch at layer " + std::to_string(k));
    if (cache) cache->inputs.push_back(x);
    Tensor z = matmul(x, layer.weight);
    for (std::size_t i = 0; i < z.rows; ++i)
      for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += layer.bias(0, j);
    if (cache) cache->preact.push_back(z);
    if (layer.act == Activation::kRelu)
      for (auto& v : z.data) v = v > 0.0f ? v : 0.0f;
    x = std::move(z);
  }
  return x;
}

Tensor mlp_backward(const MlpParams& params, const ForwardCache& cache,
                    const Tensor& grad_output, MlpGrads* grads) {
  if (cache.inputs.size() != params.layers.size() ||
      cache.preact.size() != params.layers.size())
    throw ShapeError("mlp_backward: cache does not match network depth");
  if (grad_output.rows != cache.preact.back().rows ||
      grad_output.cols != cache.preact.back().cols)
    throw ShapeError("mlp_backward: grad_output shape mismatch");
  if (grads) *grads = zero_grads_like(params);

  Tensor delta = grad_output;
  for (std::size_t k = params.layers.size(); k-- > 0;) {
    const auto& layer = params.layers[k];
    if (layer.act == Activation::kRelu) {
      const Tensor& z = cache.preact[k];
      for (std::size_t i = 0; i < delta.data.size(); ++i)
        if (z.data[i] <= 0.0f) delta.data[i] = 0.0f;
    }
    if (grads) {
      grads->layers[k].weight = matmul_tn(cache.inputs[k], delta);
      Tensor& db = grads->layers[k].bias;
      for (std::size_t i = 0; i < delta.rows; ++i)
        for (std::size_t j = 0; j < delta.cols; ++j) db(0, j) += delta(i, j);
    }
    delta = matmul_nt(delta, layer.weight);
  }
  return delta;
}

bool congruent(const MlpParams& a, const MlpParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    if (!a.layers[k].weight.same_shape(b.layers[k].weight)) return false;
    if (!a.layers[k].bias.same_shape(b.layers[k].bias)) return false;
    if (a.layers[k].act != b.layers[k].act) return false;
  }
  return true;
}

std::vector<Tensor*> parameter_tensors(MlpParams& p) {
  std::vector<Tensor*> out;
  for (auto& layer : p.layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<const Tensor*> parameter_tensors(const MlpParams& p) {
  std::vector<const Tensor*> out;
  for (const auto& layer : p.layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<Tensor*> gradient_tensors(MlpGrads& g) {
  std::vector<Tensor*> out;
  for (auto& layer : g.layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<const Tensor*> gradient_tensors(const MlpGrads& g) {
  std::vector<const Tensor*> out;
  for (const auto& layer : g.layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

}  // namespace fmcsc
