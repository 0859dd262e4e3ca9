#include "fmcsc/model.hpp"

#include <algorithm>

#include "fmcsc/errors.hpp"

namespace fmcsc {

std::vector<std::size_t> ModelShape::encoder_dims(std::size_t v) const {
  std::vector<std::size_t> dims;
  dims.push_back(view_dims.at(v));
  dims.insert(dims.end(), encoder_hidden.begin(), encoder_hidden.end());
  dims.push_back(latent_dim);
  return dims;
}

std::vector<std::size_t> ModelShape::decoder_dims(std::size_t v) const {
  auto dims = encoder_dims(v);
  std::reverse(dims.begin(), dims.end());
  return dims;
}

SingleViewModel make_single_view_model(const ModelShape& shape, std::size_t view, Rng& rng) {
  SingleViewModel m;
  m.encoder = make_mlp(shape.encoder_dims(view), rng);
  m.decoder = make_mlp(shape.decoder_dims(view), rng);
  m.view_head = make_mlp({shape.latent_dim, shape.head_hidden, shape.common_dim}, rng);
  m.common_head = make_mlp({shape.latent_dim, shape.head_hidden, shape.common_dim}, rng);
  return m;
}

MultiViewModel make_multi_view_model(const ModelShape& shape, Rng& rng) {
  MultiViewModel m;
  std::size_t latent_total = 0;
  for (std::size_t v = 0; v < shape.view_dims.size(); ++v) {
    m.encoders.push_back(make_mlp(shape.encoder_dims(v), rng));
    m.decoders.push_back(make_mlp(shape.decoder_dims(v), rng));
    m.view_heads.push_back(
        make_mlp({shape.latent_dim, shape.head_hidden, shape.common_dim}, rng));
    latent_total += shape.latent_dim;
  }
  m.fused_head = make_mlp({latent_total, shape.head_hidden, shape.common_dim}, rng);
  return m;
}

namespace {

template <class Model, class TensorPtr>
void collect_single(Model& m, std::vector<TensorPtr>& out) {
  for (auto* t : parameter_tensors(m.encoder)) out.push_back(t);
  for (auto* t : parameter_tensors(m.decoder)) out.push_back(t);
  for (auto* t : parameter_tensors(m.view_head)) out.push_back(t);
  for (auto* t : parameter_tensors(m.common_head)) out.push_back(t);
}

template <class Model, class TensorPtr>
void collect_multi(Model& m, std::vector<TensorPtr>& out) {
  for (std::size_t v = 0; v < m.encoders.size(); ++v) {
    for (auto* t : parameter_tensors(m.encoders[v])) out.push_back(t);
    for (auto* t : parameter_tensors(m.decoders[v])) out.push_back(t);
    for (auto* t : parameter_tensors(m.view_heads[v])) out.push_back(t);
  }
  for (auto* t : parameter_tensors(m.fused_head)) out.push_back(t);
}

}  // namespace

std::vector<Tensor*> bundle_tensors(SingleViewModel& m) {
  std::vector<Tensor*> out;
  collect_single(m, out);
  return out;
}

std::vector<const Tensor*> bundle_tensors(const SingleViewModel& m) {
  std::vector<const Tensor*> out;
  collect_single(m, out);
  return out;
}

std::vector<Tensor*> bundle_tensors(MultiViewModel& m) {
  std::vector<Tensor*> out;
  collect_multi(m, out);
  return out;
}

std::vector<const Tensor*> bundle_tensors(const MultiViewModel& m) {
  std::vector<const Tensor*> out;
  collect_multi(m, out);
  return out;
}

bool congruent(const SingleViewModel& a, const SingleViewModel& b) {
  return congruent(a.encoder, b.encoder) && congruent(a.decoder, b.decoder) &&
         congruent(a.view_head, b.view_head) && congruent(a.common_head, b.common_head);
}

bool congruent(const MultiViewModel& a, const MultiViewModel& b) {
  if (a.encoders.size() != b.encoders.size()) return false;
  for (std::size_t v = 0; v < a.encoders.size(); ++v) {
    if (!congruent(a.encoders[v], b.encoders[v])) return false;
    if (!congruent(a.decoders[v], b.decoders[v])) return false;
    if (!congruent(a.view_heads[v], b.view_heads[v])) return false;
  }
  return congruent(a.fused_head, b.fused_head);
}

bool bundle_finite(const SingleViewModel& m) {
  for (const Tensor* t : bundle_tensors(m))
    if (!all_finite(*t)) return false;
  return true;
}

bool bundle_finite(const MultiViewModel& m) {
  for (const Tensor* t : bundle_tensors(m))
    if (!all_finite(*t)) return false;
  return true;
}

}  // namespace fmcsc
