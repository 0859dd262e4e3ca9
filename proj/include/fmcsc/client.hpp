#pragma once

#include "fmcsc/losses.hpp"
#include "fmcsc/model.hpp"

namespace fmcsc {

struct RoundOptions {
  std::size_t epochs = 25;
  std::size_t batch_size = 256;
  double learning_rate = 3e-4;
  double tau = 0.5;
  // Feature/model contrast term in the total loss. Disabling it on
  // single-view clients switches to global-replacement semantics below.
  bool contrast_enabled = true;
  // Multi-view only: optimize the per-view replicas toward the local model
  // after the epoch loop.
  bool distill_replicas = true;
  std::size_t distill_epochs = 25;
  // Single-view only: overwrite the local model with the received global at
  // round start (the ablated alternative to the model contrast).
  bool replace_local_with_global = false;
};

struct EpochTrace {
  std::vector<double> recon;     // mean reconstruction loss per epoch
  std::vector<double> contrast;  // mean consistency loss per epoch
};

// ---------------------------------------------------------------------------

struct MultiViewClientState {
  int client_id = 0;
  std::vector<Tensor> views;  // shard-local rows, one tensor per view
  ModelShape shape;
  MultiViewModel model;
  std::vector<SingleViewModel> replicas;  // f_m^v, refreshed from globals each round
  double tau = 0.5;
};

struct SingleViewClientState {
  int client_id = 0;
  std::size_t view_index = 0;
  Tensor view;  // shard-local rows of the one view
  ModelShape shape;
  SingleViewModel model;
  SingleViewModel global_copy;  // frozen contrast target, never trained
  bool has_global_copy = false;
  double tau = 0.5;
};

MultiViewClientState make_multiview_client(int client_id, std::vector<Tensor> views,
                                           const ModelShape& shape, double tau,
                                           Rng init_rng);
SingleViewClientState make_singleview_client(int client_id, std::size_t view_index,
                                             Tensor view, const ModelShape& shape,
                                             double tau, Rng init_rng);

// Reconstruction-only training (projection heads untouched).
void pretrain_local(MultiViewClientState& state, std::size_t epochs,
                    std::size_t batch_size, double lr, Rng rng,
                    std::vector<double>* trace = nullptr);
void pretrain_local(SingleViewClientState& state, std::size_t epochs,
                    std::size_t batch_size, double lr, Rng rng,
                    std::vector<double>* trace = nullptr);

// Consensus broadcast: copy the sender's autoencoder parameters for the
// client's view types. Projection heads are untouched.
void adopt_autoencoders(MultiViewClientState& state, const MultiViewModel& src);
void adopt_autoencoders(SingleViewClientState& state, const MultiViewModel& src);

// Reconstruction loss of the current model over a row range of local data.
double reconstruction_loss(const MultiViewClientState& state);
double reconstruction_loss(const SingleViewClientState& state);

// Low/high-level features of a batch: Z^v, H^v, and the common semantics H.
struct CommonSemantics {
  Tensor common;                    // H, B × d
  std::vector<Tensor> projections;  // H^v, B × d each
  std::vector<Tensor> latents;      // Z^v, B × d_v each
};

CommonSemantics project_common(const MultiViewModel& model,
                               std::span<const Tensor> views);
CommonSemantics project_common(const SingleViewModel& model, const Tensor& view);

// One communication round. The local model is re-initialized from the globals
// (multi-view) or kept (single-view), trained for opts.epochs on the total
// loss, and packaged as an upload.
ClientUpdate train_round_multiview(MultiViewClientState& state,
                                   const GlobalModels& globals,
                                   const RoundOptions& opts, Rng rng,
                                   EpochTrace* trace = nullptr);
ClientUpdate train_round_singleview(SingleViewClientState& state,
                                    const SingleViewModel& global_for_view,
                                    const RoundOptions& opts, Rng rng,
                                    EpochTrace* trace = nullptr);

// Output-space distillation of the per-view replicas toward the frozen local
// model's common semantics. Exposed for tests; train_round_multiview calls it.
void distill_global_replicas(MultiViewClientState& state, std::size_t epochs,
                             std::size_t batch_size, double lr, Rng rng,
                             std::vector<double>* trace = nullptr);

// Shuffled mini-batch index lists; the last partial batch is kept.
std::vector<std::vector<std::uint32_t>> make_batches(std::size_t n,
                                                     std::size_t batch_size, Rng& rng);
Tensor take_rows(const Tensor& t, std::span<const std::uint32_t> rows);

}  // namespace fmcsc
