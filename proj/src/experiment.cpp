#include "fmcsc/experiment.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "fmcsc/errors.hpp"

namespace fmcsc {

namespace {

void parallel_for(std::size_t workers, std::size_t n,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

template <class Fn>
auto with_context(const std::string& ctx, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(ctx + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(ctx + ": " + e.what());
  } catch (const ProtocolError& e) {
    throw ProtocolError(ctx + ": " + e.what());
  }
}

struct ClientSlot {
  ClientShard shard;
  std::optional<MultiViewClientState> mv;
  std::optional<SingleViewClientState> sv;
};

struct PooledEval {
  Tensor common;  // N × d, rows grouped by client in id order
  std::vector<std::uint32_t> truth;
  std::vector<std::uint32_t> pred;
  double acc = 0.0, nmi_v = 0.0, ari_v = 0.0;
};

PooledEval evaluate_pooled(const std::vector<ClientSlot>& slots,
                           const MultiViewDataset& ds, const GlobalModels& globals,
                           std::size_t k, std::uint64_t eval_seed) {
  PooledEval out;
  std::size_t d = 0, total = 0;
  std::vector<Tensor> parts;
  for (const auto& slot : slots) {
    Tensor h;
    if (slot.mv) {
      h = project_common(globals.multi,
                         std::span<const Tensor>(slot.mv->views))
              .common;
    } else {
      h = project_common(globals.per_view[slot.sv->view_index], slot.sv->view).common;
    }
    d = h.cols;
    total += h.rows;
    parts.push_back(std::move(h));
    for (auto idx : slot.shard.sample_indices) out.truth.push_back(ds.labels[idx]);
  }
  out.common = Tensor(total, d);
  std::size_t row = 0;
  for (const auto& p : parts) {
    std::copy(p.data.begin(), p.data.end(), out.common.data.begin() + row * d);
    row += p.rows;
  }
  auto assign = kmeans(out.common, k, eval_seed);
  out.pred = std::move(assign.labels);
  out.acc = clustering_accuracy(out.pred, out.truth);
  out.nmi_v = nmi(out.pred, out.truth);
  out.ari_v = ari(out.pred, out.truth);
  return out;
}

ClientUpdate pretrain_upload(const ClientSlot& slot) {
  ClientUpdate u;
  u.client_id = slot.shard.client_id;
  if (slot.mv) {
    u.kind = ClientKind::kMultiView;
    u.multi = slot.mv->model;
    u.sample_count = slot.shard.sample_indices.size();
    u.recon_loss = reconstruction_loss(*slot.mv);
  } else {
    u.kind = ClientKind::kSingleView;
    u.view_index = slot.sv->view_index;
    u.single = slot.sv->model;
    u.sample_count = slot.shard.sample_indices.size();
    u.recon_loss = reconstruction_loss(*slot.sv);
  }
  return u;
}

void fill_loss_means(MetricsRow& row, const std::vector<ClientUpdate>& updates) {
  double recon_mv = 0.0, contrast_mv = 0.0, recon_sv = 0.0, contrast_sv = 0.0;
  std::size_t n_mv = 0, n_sv = 0;
  for (const auto& u : updates) {
    if (u.kind == ClientKind::kMultiView) {
      recon_mv += u.recon_loss;
      contrast_mv += u.weight_statistic;
      ++n_mv;
    } else {
      recon_sv += u.recon_loss;
      contrast_sv += u.weight_statistic;
      ++n_sv;
    }
  }
  row.mean_recon_loss_mv = n_mv ? recon_mv / n_mv : 0.0;
  row.mean_contrast_loss_mv = n_mv ? contrast_mv / n_mv : 0.0;
  row.mean_recon_loss_sv = n_sv ? recon_sv / n_sv : 0.0;
  row.mean_contrast_loss_sv = n_sv ? contrast_sv / n_sv : 0.0;
}

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.dataset_path.empty())
    return run_experiment(cfg, load_dataset(cfg.dataset_path));
  SyntheticSpec spec = cfg.synthetic;
  spec.seed = Rng(cfg.seed).stream("data").next_u64();
  return run_experiment(cfg, generate_synthetic(spec));
}

MetricsReport run_experiment(const ExperimentConfig& cfg, const MultiViewDataset& ds) {
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  Rng master(cfg.seed);

  std::size_t k = cfg.num_clusters ? cfg.num_clusters : ds.num_classes;
  if (k < 1) throw ConfigError("run: cluster count is zero and dataset has no classes");
  std::size_t num_views = ds.num_views();

  PartitionConfig pcfg = cfg.partition;
  pcfg.seed = master.stream("partition").next_u64();
  auto shards = partition(ds, pcfg);

  ModelShape shape;
  shape.view_dims = ds.view_dims();
  shape.encoder_hidden = cfg.encoder_hidden;
  shape.latent_dim = cfg.latent_dim;
  shape.head_hidden = cfg.head_hidden;
  shape.common_dim = cfg.common_dim;

  std::vector<ClientSlot> slots(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i) {
    slots[i].shard = shards[i];
    Rng init = master.stream("init").stream(
        static_cast<std::uint64_t>(shards[i].client_id));
    if (shards[i].kind == ClientKind::kMultiView) {
      std::vector<Tensor> views;
      for (std::size_t v = 0; v < num_views; ++v)
        views.push_back(shard_view(ds, shards[i], v));
      slots[i].mv = make_multiview_client(shards[i].client_id, std::move(views), shape,
                                          cfg.tau_m, init);
    } else {
      slots[i].sv = make_singleview_client(shards[i].client_id, shards[i].view_index,
                                           shard_view(ds, shards[i], shards[i].view_index),
                                           shape, cfg.tau_p, init);
    }
  }

  // --- Local pre-training, optionally from a consensus broadcast. ---
  std::size_t designated = 0;
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].mv && (!slots[designated].mv ||
                        slots[i].shard.client_id < slots[designated].shard.client_id))
      designated = i;
  if (!slots[designated].mv)
    throw ProtocolError("run: no multi-view client in the partition");

  auto pretrain_one = [&](std::size_t i) {
    Rng rng = master.stream("pretrain").stream(
        static_cast<std::uint64_t>(slots[i].shard.client_id));
    with_context("pre-training client " + std::to_string(slots[i].shard.client_id),
                 [&] {
                   if (slots[i].mv)
                     pretrain_local(*slots[i].mv, cfg.pretrain_epochs, cfg.batch_size,
                                    cfg.learning_rate, rng);
                   else
                     pretrain_local(*slots[i].sv, cfg.pretrain_epochs, cfg.batch_size,
                                    cfg.learning_rate, rng);
                 });
  };

  if (cfg.consensus_pretraining) {
    pretrain_one(designated);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (i == designated) continue;
      if (slots[i].mv) adopt_autoencoders(*slots[i].mv, slots[designated].mv->model);
      else adopt_autoencoders(*slots[i].sv, slots[designated].mv->model);
    }
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (i != designated) rest.push_back(i);
    parallel_for(cfg.workers, rest.size(), [&](std::size_t j) { pretrain_one(rest[j]); });
  } else {
    parallel_for(cfg.workers, slots.size(), pretrain_one);
  }

  std::vector<ClientUpdate> pretrain_updates;
  for (const auto& slot : slots) pretrain_updates.push_back(pretrain_upload(slot));
  if (cfg.dp.enabled)
    for (auto& u : pretrain_updates)
      apply_dp_noise(u, cfg.dp,
                     master.stream("dp-pretrain").stream(
                         static_cast<std::uint64_t>(u.client_id)));

  GlobalModels globals = with_context(
      "server initialization", [&] { return consensus_init(pretrain_updates, num_views); });

  std::uint64_t eval_seed = master.stream("eval").next_u64();

  MetricsReport report;
  report.seed = cfg.seed;
  report.config_text = config_echo(cfg);

  PooledEval eval = evaluate_pooled(slots, ds, globals, k, eval_seed);
  {
    MetricsRow row;
    row.round = 0;
    row.acc = eval.acc;
    row.nmi = eval.nmi_v;
    row.ari = eval.ari_v;
    fill_loss_means(row, pretrain_updates);
    report.rows.push_back(row);
  }

  // --- Federated rounds. ---
  for (std::size_t r = 1; r <= cfg.rounds; ++r) {
    resample_participation(shards, cfg.partition.participation_rate,
                           master.stream("participation").stream(r));
    for (std::size_t i = 0; i < slots.size(); ++i)
      slots[i].shard.participates = shards[i].participates;

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i].shard.participates) active.push_back(i);

    std::vector<ClientUpdate> updates(active.size());
    parallel_for(cfg.workers, active.size(), [&](std::size_t j) {
      std::size_t i = active[j];
      int cid = slots[i].shard.client_id;
      Rng rng = master.stream("round").stream(r).stream(static_cast<std::uint64_t>(cid));
      std::string ctx =
          "round " + std::to_string(r) + ", client " + std::to_string(cid);
      RoundOptions opts;
      opts.epochs = cfg.local_epochs;
      opts.batch_size = cfg.batch_size;
      opts.learning_rate = cfg.learning_rate;
      ClientUpdate u = with_context(ctx, [&] {
        if (slots[i].mv) {
          opts.tau = cfg.tau_m;
          opts.contrast_enabled = cfg.contrast_enabled;
          opts.distill_replicas = cfg.component_b;
          opts.distill_epochs = cfg.local_epochs;
          return train_round_multiview(*slots[i].mv, globals, opts, rng);
        }
        opts.tau = cfg.tau_p;
        opts.contrast_enabled = cfg.contrast_enabled && cfg.component_c;
        opts.replace_local_with_global = !cfg.component_c;
        return train_round_singleview(*slots[i].sv,
                                      globals.per_view[slots[i].sv->view_index], opts,
                                      rng);
      });
      if (cfg.dp.enabled)
        apply_dp_noise(u, cfg.dp,
                       master.stream("dp-round").stream(r).stream(
                           static_cast<std::uint64_t>(cid)));
      updates[j] = std::move(u);
    });

    WeightingOptions wopts;
    wopts.delta_m = cfg.delta_m;
    wopts.delta_p = cfg.delta_p;
    wopts.per_type_normalization = cfg.per_type_normalization;
    wopts.uniform = !cfg.weighted_aggregation;
    std::string ctx = "round " + std::to_string(r) + ", server";
    AggregationWeights weights =
        with_context(ctx, [&] { return compute_weights(updates, num_views, wopts); });
    globals = with_context(ctx, [&] { return aggregate(updates, weights); });
    globals.round_index = static_cast<int>(r);

    eval = evaluate_pooled(slots, ds, globals, k, eval_seed);
    MetricsRow row;
    row.round = r;
    row.acc = eval.acc;
    row.nmi = eval.nmi_v;
    row.ari = eval.ari_v;
    fill_loss_means(row, updates);
    row.min_weight = weights.min_weight();
    row.max_weight = weights.max_weight();
    report.rows.push_back(row);
  }

  report.embedding = pca_embed_2d(eval.common);
  report.pred_labels = std::move(eval.pred);
  report.true_labels = std::move(eval.truth);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string metrics_csv(const MetricsReport& report) {
  std::string out =
      "round,acc,nmi,ari,mean_recon_loss_mv,mean_contrast_loss_mv,"
      "mean_recon_loss_sv,mean_contrast_loss_sv,min_weight,max_weight\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.round);
    for (double x : {r.acc, r.nmi, r.ari, r.mean_recon_loss_mv, r.mean_contrast_loss_mv,
                     r.mean_recon_loss_sv, r.mean_contrast_loss_sv, r.min_weight,
                     r.max_weight}) {
      out += ",";
      out += fmt_g(x);
    }
    out += "\n";
  }
  return out;
}

void emit_report(const MetricsReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto write_file = [&](const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("emit_report: cannot open " + p.string());
    out << body;
    if (!out) throw DataError("emit_report: write failed for " + p.string());
  };
  write_file(dir / "metrics.csv", metrics_csv(report));
  write_file(dir / "config.echo", report.config_text);

  std::string emb = "x,y,pred_label,true_label\n";
  for (std::size_t i = 0; i < report.embedding.rows; ++i) {
    emb += fmt_g(static_cast<double>(report.embedding.data[i * 2]));
    emb += ",";
    emb += fmt_g(static_cast<double>(report.embedding.data[i * 2 + 1]));
    emb += ",";
    emb += std::to_string(report.pred_labels[i]);
    emb += ",";
    emb += std::to_string(report.true_labels[i]);
    emb += "\n";
  }
  write_file(dir / "embedding.csv", emb);
}

}  // namespace fmcsc
