#pragma once

#include <optional>

#include "fmcsc/adam.hpp"
#include "fmcsc/mlp.hpp"
#include "fmcsc/partition.hpp"

namespace fmcsc {

// Architecture description shared by clients and server. The latent dimension
// d_v and the common-semantics dimension d coincide (both 20 by default) so
// the model contrastive loss is well defined.
struct ModelShape {
  std::vector<std::size_t> view_dims;            // D_v per view
  std::vector<std::size_t> encoder_hidden = {500, 500, 2000};
  std::size_t latent_dim = 20;                   // d_v
  std::size_t head_hidden = 256;
  std::size_t common_dim = 20;                   // d

  std::vector<std::size_t> encoder_dims(std::size_t v) const;
  std::vector<std::size_t> decoder_dims(std::size_t v) const;  // symmetric
};

// One view's autoencoder plus its projection heads. This is the architecture
// uploaded by single-view clients and replicated inside multi-view clients.
struct SingleViewModel {
  MlpParams encoder;      // D_v -> ... -> d_v
  MlpParams decoder;      // d_v -> ... -> D_v
  MlpParams view_head;    // d_v -> head_hidden -> d
  MlpParams common_head;  // d_v -> head_hidden -> d
};

struct MultiViewModel {
  std::vector<MlpParams> encoders;
  std::vector<MlpParams> decoders;
  std::vector<MlpParams> view_heads;  // d_v -> head_hidden -> d, one per view
  MlpParams fused_head;               // sum(d_v) -> head_hidden -> d
};

SingleViewModel make_single_view_model(const ModelShape& shape, std::size_t view, Rng& rng);
MultiViewModel make_multi_view_model(const ModelShape& shape, Rng& rng);

std::vector<Tensor*> bundle_tensors(SingleViewModel& m);
std::vector<const Tensor*> bundle_tensors(const SingleViewModel& m);
std::vector<Tensor*> bundle_tensors(MultiViewModel& m);
std::vector<const Tensor*> bundle_tensors(const MultiViewModel& m);

bool congruent(const SingleViewModel& a, const SingleViewModel& b);
bool congruent(const MultiViewModel& a, const MultiViewModel& b);

bool bundle_finite(const SingleViewModel& m);
bool bundle_finite(const MultiViewModel& m);

// The server's V single-view global models plus the one multi-view global.
struct GlobalModels {
  MultiViewModel multi;
  std::vector<SingleViewModel> per_view;
  int round_index = 0;
};

// What a client uploads at the end of a round.
struct ClientUpdate {
  int client_id = 0;
  ClientKind kind = ClientKind::kMultiView;
  std::size_t view_index = 0;  // single-view uploads only
  std::optional<MultiViewModel> multi;            // f_m
  std::vector<SingleViewModel> replicas;          // f_m^v, v = 1..V
  std::optional<SingleViewModel> single;          // f_p
  double weight_statistic = 0.0;                  // final consistency loss
  double recon_loss = 0.0;                        // final reconstruction loss
  std::size_t sample_count = 0;
};

}  // namespace fmcsc
