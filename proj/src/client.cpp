#include "fmcsc/client.hpp"

#include <cmath>
#include <numeric>

#include "fmcsc/errors.hpp"

namespace fmcsc {

namespace {

// Mean-squared reconstruction gradient: d/dXhat of (1/B)·sum ||Xhat - X||^2.
Tensor recon_grad(const Tensor& xhat, const Tensor& x, double* loss_out) {
  Tensor g(xhat.rows, xhat.cols);
  double inv_b = 1.0 / static_cast<double>(xhat.rows);
  double loss = 0.0;
  for (std::size_t i = 0; i < xhat.data.size(); ++i) {
    double d = static_cast<double>(xhat.data[i]) - x.data[i];
    loss += d * d;
    g.data[i] = static_cast<float>(2.0 * d * inv_b);
  }
  if (loss_out) *loss_out += loss * inv_b;
  return g;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<std::vector<std::uint32_t>> make_batches(std::size_t n,
                                                     std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw ConfigError("make_batches: batch_size must be > 0");
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(order);
  std::vector<std::vector<std::uint32_t>> batches;
  for (std::size_t pos = 0; pos < n; pos += batch_size) {
    std::size_t end = std::min(pos + batch_size, n);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

Tensor take_rows(const Tensor& t, std::span<const std::uint32_t> rows) {
  Tensor out(rows.size(), t.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < t.cols; ++j) out(i, j) = t(rows[i], j);
  return out;
}

MultiViewClientState make_multiview_client(int client_id, std::vector<Tensor> views,
                                           const ModelShape& shape, double tau,
                                           Rng init_rng) {
  if (views.empty() || views.front().rows == 0)
    throw ConfigError("multi-view client needs a non-empty shard");
  MultiViewClientState state;
  state.client_id = client_id;
  state.views = std::move(views);
  state.shape = shape;
  state.model = make_multi_view_model(shape, init_rng);
  state.tau = tau;
  return state;
}

SingleViewClientState make_singleview_client(int client_id, std::size_t view_index,
                                             Tensor view, const ModelShape& shape,
                                             double tau, Rng init_rng) {
  if (view.rows == 0) throw ConfigError("single-view client needs a non-empty shard");
  SingleViewClientState state;
  state.client_id = client_id;
  state.view_index = view_index;
  state.view = std::move(view);
  state.shape = shape;
  state.model = make_single_view_model(shape, view_index, init_rng);
  state.tau = tau;
  return state;
}

namespace {

// One reconstruction-only Adam step on an encoder/decoder pair.
double autoencoder_step(MlpParams& enc, MlpParams& dec, AdamState& enc_adam,
                        AdamState& dec_adam, const Tensor& batch, double lr) {
  ForwardCache ce, cd;
  Tensor z = mlp_forward(enc, batch, &ce);
  Tensor xhat = mlp_forward(dec, z, &cd);
  double loss = 0.0;
  Tensor dxhat = recon_grad(xhat, batch, &loss);
  MlpGrads gdec, genc;
  Tensor dz = mlp_backward(dec, cd, dxhat, &gdec);
  mlp_backward(enc, ce, dz, &genc);
  adam_step(dec_adam, dec, gdec, lr);
  adam_step(enc_adam, enc, genc, lr);
  return loss;
}

}  // namespace

void pretrain_local(MultiViewClientState& state, std::size_t epochs,
                    std::size_t batch_size, double lr, Rng rng,
                    std::vector<double>* trace) {
  std::size_t num_views = state.views.size();
  std::vector<AdamState> enc_adam, dec_adam;
  for (std::size_t v = 0; v < num_views; ++v) {
    enc_adam.push_back(make_adam_state(state.model.encoders[v]));
    dec_adam.push_back(make_adam_state(state.model.decoders[v]));
  }
  std::size_t n = state.views.front().rows;
  for (std::size_t e = 0; e < epochs; ++e) {
    auto batches = make_batches(n, batch_size, rng);
    std::vector<double> losses;
    for (const auto& idx : batches) {
      double batch_loss = 0.0;
      for (std::size_t v = 0; v < num_views; ++v) {
        Tensor x = take_rows(state.views[v], idx);
        batch_loss += autoencoder_step(state.model.encoders[v], state.model.decoders[v],
                                       enc_adam[v], dec_adam[v], x, lr);
      }
      losses.push_back(batch_loss);
    }
    if (trace) trace->push_back(mean(losses));
  }
}

void pretrain_local(SingleViewClientState& state, std::size_t epochs,
                    std::size_t batch_size, double lr, Rng rng,
                    std::vector<double>* trace) {
  AdamState enc_adam = make_adam_state(state.model.encoder);
  AdamState dec_adam = make_adam_state(state.model.decoder);
  for (std::size_t e = 0; e < epochs; ++e) {
    auto batches = make_batches(state.view.rows, batch_size, rng);
    std::vector<double> losses;
    for (const auto& idx : batches) {
      Tensor x = take_rows(state.view, idx);
      losses.push_back(autoencoder_step(state.model.encoder, state.model.decoder,
                                        enc_adam, dec_adam, x, lr));
    }
    if (trace) trace->push_back(mean(losses));
  }
}

void adopt_autoencoders(MultiViewClientState& state, const MultiViewModel& src) {
  if (src.encoders.size() != state.model.encoders.size())
    throw ProtocolError("adopt_autoencoders: view count mismatch");
  for (std::size_t v = 0; v < src.encoders.size(); ++v) {
    if (!congruent(src.encoders[v], state.model.encoders[v]))
      throw ProtocolError("adopt_autoencoders: encoder architecture mismatch");
    state.model.encoders[v] = src.encoders[v];
    state.model.decoders[v] = src.decoders[v];
  }
}

void adopt_autoencoders(SingleViewClientState& state, const MultiViewModel& src) {
  if (state.view_index >= src.encoders.size())
    throw ProtocolError("adopt_autoencoders: sender lacks view " +
                        std::to_string(state.view_index));
  if (!congruent(src.encoders[state.view_index], state.model.encoder))
    throw ProtocolError("adopt_autoencoders: encoder architecture mismatch");
  state.model.encoder = src.encoders[state.view_index];
  state.model.decoder = src.decoders[state.view_index];
}

double reconstruction_loss(const MultiViewClientState& state) {
  double loss = 0.0;
  double inv_n = 1.0 / static_cast<double>(state.views.front().rows);
  for (std::size_t v = 0; v < state.views.size(); ++v) {
    Tensor xhat = mlp_forward(state.model.decoders[v],
                              mlp_forward(state.model.encoders[v], state.views[v]));
    for (std::size_t i = 0; i < xhat.data.size(); ++i) {
      double d = static_cast<double>(xhat.data[i]) - state.views[v].data[i];
      loss += d * d * inv_n;
    }
  }
  return loss;
}

double reconstruction_loss(const SingleViewClientState& state) {
  Tensor xhat =
      mlp_forward(state.model.decoder, mlp_forward(state.model.encoder, state.view));
  double loss = 0.0;
  double inv_n = 1.0 / static_cast<double>(state.view.rows);
  for (std::size_t i = 0; i < xhat.data.size(); ++i) {
    double d = static_cast<double>(xhat.data[i]) - state.view.data[i];
    loss += d * d * inv_n;
  }
  return loss;
}

CommonSemantics project_common(const MultiViewModel& model,
                               std::span<const Tensor> views) {
  if (views.size() != model.encoders.size())
    throw ProtocolError("project_common: view count mismatch");
  CommonSemantics out;
  for (std::size_t v = 0; v < views.size(); ++v) {
    out.latents.push_back(mlp_forward(model.encoders[v], views[v]));
    out.projections.push_back(mlp_forward(model.view_heads[v], out.latents[v]));
  }
  // Concatenation in ascending view order is the canonical input of the
  // fused head.
  Tensor zcat = concat_cols(out.latents);
  out.common = mlp_forward(model.fused_head, zcat);
  return out;
}

CommonSemantics project_common(const SingleViewModel& model, const Tensor& view) {
  CommonSemantics out;
  out.latents.push_back(mlp_forward(model.encoder, view));
  out.projections.push_back(mlp_forward(model.view_head, out.latents[0]));
  out.common = mlp_forward(model.common_head, out.latents[0]);
  return out;
}

ClientUpdate train_round_multiview(MultiViewClientState& state,
                                   const GlobalModels& globals,
                                   const RoundOptions& opts, Rng rng,
                                   EpochTrace* trace) {
  std::size_t num_views = state.views.size();
  if (!congruent(globals.multi, state.model))
    throw ProtocolError("train_round_multiview: global architecture mismatch");
  if (globals.per_view.size() != num_views)
    throw ProtocolError("train_round_multiview: expected " + std::to_string(num_views) +
                        " per-view globals");

  // FedAvg-style re-initialization from the multi-view global; replicas start
  // from the received per-view globals.
  state.model = globals.multi;
  state.replicas = globals.per_view;

  std::vector<AdamState> enc_adam, dec_adam, head_adam;
  for (std::size_t v = 0; v < num_views; ++v) {
    enc_adam.push_back(make_adam_state(state.model.encoders[v]));
    dec_adam.push_back(make_adam_state(state.model.decoders[v]));
    head_adam.push_back(make_adam_state(state.model.view_heads[v]));
  }
  AdamState fused_adam = make_adam_state(state.model.fused_head);

  std::size_t n = state.views.front().rows;
  double final_contrast = 0.0, final_recon = 0.0;
  for (std::size_t e = 0; e < opts.epochs; ++e) {
    auto batches = make_batches(n, opts.batch_size, rng);
    std::vector<double> recon_losses, contrast_losses;
    for (const auto& idx : batches) {
      std::size_t b = idx.size();
      double recon = 0.0;
      std::vector<ForwardCache> enc_cache(num_views), dec_cache(num_views),
          head_cache(num_views);
      std::vector<Tensor> latents(num_views), dlatent(num_views), projections(num_views);
      std::vector<MlpGrads> dec_grads(num_views);
      for (std::size_t v = 0; v < num_views; ++v) {
        Tensor x = take_rows(state.views[v], idx);
        latents[v] = mlp_forward(state.model.encoders[v], x, &enc_cache[v]);
        Tensor xhat = mlp_forward(state.model.decoders[v], latents[v], &dec_cache[v]);
        Tensor dxhat = recon_grad(xhat, x, &recon);
        dlatent[v] =
            mlp_backward(state.model.decoders[v], dec_cache[v], dxhat, &dec_grads[v]);
        projections[v] =
            mlp_forward(state.model.view_heads[v], latents[v], &head_cache[v]);
      }
      ForwardCache fused_cache;
      Tensor zcat = concat_cols(latents);
      Tensor common = mlp_forward(state.model.fused_head, zcat, &fused_cache);

      bool contrast_active = opts.contrast_enabled && b >= 2;
      if (contrast_active) {
        auto fc = feature_contrastive_loss(common, projections, opts.tau);
        contrast_losses.push_back(fc.loss);
        for (std::size_t v = 0; v < num_views; ++v) {
          MlpGrads head_grads;
          Tensor dz = mlp_backward(state.model.view_heads[v], head_cache[v],
                                   fc.grad_views[v], &head_grads);
          axpy(dlatent[v], 1.0f, dz);
          adam_step(head_adam[v], state.model.view_heads[v], head_grads,
                    opts.learning_rate);
        }
        MlpGrads fused_grads;
        Tensor dzcat =
            mlp_backward(state.model.fused_head, fused_cache, fc.grad_common, &fused_grads);
        std::size_t off = 0;
        for (std::size_t v = 0; v < num_views; ++v) {
          for (std::size_t i = 0; i < b; ++i)
            for (std::size_t j = 0; j < latents[v].cols; ++j)
              dlatent[v](i, j) += dzcat(i, off + j);
          off += latents[v].cols;
        }
        adam_step(fused_adam, state.model.fused_head, fused_grads, opts.learning_rate);
      }

      for (std::size_t v = 0; v < num_views; ++v) {
        MlpGrads enc_grads;
        mlp_backward(state.model.encoders[v], enc_cache[v], dlatent[v], &enc_grads);
        adam_step(dec_adam[v], state.model.decoders[v], dec_grads[v], opts.learning_rate);
        adam_step(enc_adam[v], state.model.encoders[v], enc_grads, opts.learning_rate);
      }
      recon_losses.push_back(recon);
    }
    final_recon = mean(recon_losses);
    final_contrast = mean(contrast_losses);
    if (trace) {
      trace->recon.push_back(final_recon);
      trace->contrast.push_back(final_contrast);
    }
  }

  if (opts.distill_replicas && opts.epochs > 0)
    distill_global_replicas(state, opts.distill_epochs, opts.batch_size,
                            opts.learning_rate, rng.stream("distill"));

  ClientUpdate update;
  update.client_id = state.client_id;
  update.kind = ClientKind::kMultiView;
  update.multi = state.model;
  update.replicas = state.replicas;
  update.weight_statistic = final_contrast;
  update.recon_loss = final_recon;
  update.sample_count = n;
  return update;
}

void distill_global_replicas(MultiViewClientState& state, std::size_t epochs,
                             std::size_t batch_size, double lr, Rng rng,
                             std::vector<double>* trace) {
  // Target: the frozen local model's common semantics on all local samples.
  Tensor target = project_common(state.model, state.views).common;
  for (std::size_t v = 0; v < state.replicas.size(); ++v) {
    SingleViewModel& replica = state.replicas[v];
    AdamState enc_adam = make_adam_state(replica.encoder);
    AdamState head_adam = make_adam_state(replica.common_head);
    Rng view_rng = rng.stream(v);
    for (std::size_t e = 0; e < epochs; ++e) {
      auto batches = make_batches(state.views[v].rows, batch_size, view_rng);
      std::vector<double> losses;
      for (const auto& idx : batches) {
        Tensor x = take_rows(state.views[v], idx);
        Tensor t = take_rows(target, idx);
        ForwardCache ce, ch;
        Tensor z = mlp_forward(replica.encoder, x, &ce);
        Tensor h = mlp_forward(replica.common_head, z, &ch);
        double loss = 0.0;
        Tensor dh = recon_grad(h, t, &loss);
        MlpGrads head_grads, enc_grads;
        Tensor dz = mlp_backward(replica.common_head, ch, dh, &head_grads);
        mlp_backward(replica.encoder, ce, dz, &enc_grads);
        adam_step(head_adam, replica.common_head, head_grads, lr);
        adam_step(enc_adam, replica.encoder, enc_grads, lr);
        losses.push_back(loss);
      }
      if (trace) trace->push_back(mean(losses));
    }
  }
}

ClientUpdate train_round_singleview(SingleViewClientState& state,
                                    const SingleViewModel& global_for_view,
                                    const RoundOptions& opts, Rng rng,
                                    EpochTrace* trace) {
  if (!congruent(global_for_view, state.model))
    throw ProtocolError("train_round_singleview: global architecture mismatch");

  state.global_copy = global_for_view;
  state.has_global_copy = true;
  if (opts.replace_local_with_global) state.model = global_for_view;

  AdamState enc_adam = make_adam_state(state.model.encoder);
  AdamState dec_adam = make_adam_state(state.model.decoder);
  AdamState head_adam = make_adam_state(state.model.common_head);

  double final_contrast = 0.0, final_recon = 0.0;
  for (std::size_t e = 0; e < opts.epochs; ++e) {
    auto batches = make_batches(state.view.rows, opts.batch_size, rng);
    std::vector<double> recon_losses, contrast_losses;
    for (const auto& idx : batches) {
      Tensor x = take_rows(state.view, idx);
      double recon = 0.0;
      ForwardCache enc_cache, dec_cache, head_cache;
      Tensor z = mlp_forward(state.model.encoder, x, &enc_cache);
      Tensor xhat = mlp_forward(state.model.decoder, z, &dec_cache);
      Tensor dxhat = recon_grad(xhat, x, &recon);
      MlpGrads dec_grads;
      Tensor dz = mlp_backward(state.model.decoder, dec_cache, dxhat, &dec_grads);

      Tensor common = mlp_forward(state.model.common_head, z, &head_cache);
      // Frozen global output; no gradient flows back into the copy.
      Tensor global_common = mlp_forward(
          state.global_copy.common_head, mlp_forward(state.global_copy.encoder, x));
      auto mc = model_contrastive_loss(common, global_common, z, opts.tau);
      contrast_losses.push_back(mc.loss);
      if (opts.contrast_enabled) {
        MlpGrads head_grads;
        Tensor dz_head =
            mlp_backward(state.model.common_head, head_cache, mc.grad_common, &head_grads);
        axpy(dz, 1.0f, dz_head);
        axpy(dz, 1.0f, mc.grad_latent);
        adam_step(head_adam, state.model.common_head, head_grads, opts.learning_rate);
      }
      MlpGrads enc_grads;
      mlp_backward(state.model.encoder, enc_cache, dz, &enc_grads);
      adam_step(dec_adam, state.model.decoder, dec_grads, opts.learning_rate);
      adam_step(enc_adam, state.model.encoder, enc_grads, opts.learning_rate);
      recon_losses.push_back(recon);
    }
    final_recon = mean(recon_losses);
    final_contrast = mean(contrast_losses);
    if (trace) {
      trace->recon.push_back(final_recon);
      trace->contrast.push_back(final_contrast);
    }
  }

  ClientUpdate update;
  update.client_id = state.client_id;
  update.kind = ClientKind::kSingleView;
  update.view_index = state.view_index;
  update.single = state.model;
  update.weight_statistic = final_contrast;
  update.recon_loss = final_recon;
  update.sample_count = state.view.rows;
  return update;
}

}  // namespace fmcsc
