#include "scenezsl/train/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>

#include "scenezsl/nn/checkpoint.hpp"
#include "scenezsl/parallel.hpp"
#include "scenezsl/rng.hpp"

namespace scenezsl::train {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw TrainError(TrainError::Code::kBadConfig, what);
}

std::string shortest(double v) {
  char buf[400];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

template <typename T>
void add_into(nn::BasicModelParams<T>& dst, const nn::BasicModelParams<T>& src) {
  auto d = dst.named();
  const auto s = src.named();
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto out = d[i].second->data();
    const auto in = s[i].second->data();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += in[k];
  }
}

}  // namespace

void TrainConfig::validate() const {
  require(batch_size >= 2, "batch_size must be >= 2");
  require(lr.lr0 > 0.0 && std::isfinite(lr.lr0), "lr0 must be positive");
  require(lr.factor > 0.0 && lr.factor <= 1.0, "lr decay factor must be in (0, 1]");
  require(lr.every > 0, "lr decay interval must be positive");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, "adam beta1 must be in [0, 1)");
  require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, "adam beta2 must be in [0, 1)");
  require(adam.eps > 0.0, "adam eps must be positive");
  require(temperature > 0.0, "temperature must be positive");
  try {
    scene.validate();
  } catch (const std::invalid_argument& e) {
    throw TrainError(TrainError::Code::kBadConfig, e.what());
  }
}

double lr_at(std::size_t epoch, const TrainConfig& cfg) { return cfg.lr.at(epoch); }

std::string format_trace_row(const TraceRow& row) {
  return std::to_string(row.epoch) + "," + std::to_string(row.iteration) + "," + shortest(row.loss) + "," +
         shortest(row.lr) + "\n";
}

std::string format_trace(std::span<const TraceRow> trace) {
  std::string out = "epoch,iteration,loss,lr\n";
  for (const auto& row : trace) out += format_trace_row(row);
  return out;
}

namespace {

std::vector<double> epoch_means(std::span<const TraceRow> trace, double TraceRow::*field) {
  std::vector<double> sums, counts;
  for (const auto& row : trace) {
    if (row.epoch >= sums.size()) {
      sums.resize(row.epoch + 1, 0.0);
      counts.resize(row.epoch + 1, 0.0);
    }
    sums[row.epoch] += row.*field;
    counts[row.epoch] += 1.0;
  }
  for (std::size_t e = 0; e < sums.size(); ++e) sums[e] = counts[e] > 0 ? sums[e] / counts[e] : 0.0;
  return sums;
}

}  // namespace

std::vector<double> epoch_mean_losses(std::span<const TraceRow> trace) {
  return epoch_means(trace, &TraceRow::loss);
}

std::vector<double> epoch_mean_retrieval(std::span<const TraceRow> trace) {
  return epoch_means(trace, &TraceRow::retrieval);
}

std::vector<std::size_t> caption_groups(std::span<const std::string> captions) {
  std::map<std::string_view, std::size_t> first;
  std::vector<std::size_t> groups(captions.size());
  for (std::size_t i = 0; i < captions.size(); ++i) {
    groups[i] = first.try_emplace(captions[i], i).first->second;
  }
  return groups;
}

double retrieval_accuracy(const loss::SimilarityMatrix& sim, std::span<const std::size_t> groups) {
  if (sim.n == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < sim.n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < sim.n; ++j) {
      if (sim.at(i, j) > sim.at(i, best)) best = j;
    }
    const bool same = groups.empty() ? best == i : groups[best] == groups[i];
    hits += same ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(sim.n);
}

template <typename T>
PipelineResult<T> pipeline_loss(const nn::BasicModelParams<T>& params,
                                std::span<const dataset::PointCloud> clouds,
                                std::span<const std::vector<double>> texts, double temperature,
                                loss::LossForm form, std::span<const std::size_t> groups,
                                std::size_t threads) {
  const std::size_t n = clouds.size();
  if (texts.size() != n) {
    throw nn::NnError(nn::NnErrc::kShapeMismatch, "batch has " + std::to_string(n) + " clouds and " +
                                                      std::to_string(texts.size()) + " captions");
  }
  if (n == 0) throw loss::LossError(loss::LossError::Code::kBatchTooSmall, "empty batch");
  const std::size_t u = params.config.embed_dim;
  const std::size_t d = params.config.text_dim;

  // Point side: one graph per sample, kept until its output gradient is known.
  struct PointGraph {
    nn::Graph<T> graph;
    nn::BoundParams bound;
    nn::Var z;
  };
  std::vector<std::optional<PointGraph>> point_graphs(n);
  std::vector<double> z(n * u);
  parallel_for(n, threads, [&](std::size_t i) {
    PointGraph pg;
    pg.bound = nn::bind(pg.graph, params, true, nn::kBindEncoder | nn::kBindPointHead);
    const nn::Var pts = pg.graph.constant(nn::points_tensor<T>(clouds[i]));
    pg.z = nn::project_point(pg.graph, pg.bound, nn::encode(pg.graph, pg.bound, pts));
    const auto zi = pg.graph.value(pg.z).data();
    for (std::size_t k = 0; k < u; ++k) z[i * u + k] = static_cast<double>(zi[k]);
    point_graphs[i].emplace(std::move(pg));
  });

  // Text side: the whole batch as one N x d input.
  nn::Graph<T> text_graph;
  const nn::BoundParams text_bound = nn::bind(text_graph, params, true, nn::kBindTextHead);
  nn::BasicTensor<T> e(nn::Shape{n, d});
  for (std::size_t i = 0; i < n; ++i) {
    if (texts[i].size() != d) {
      throw nn::NnError(nn::NnErrc::kShapeMismatch, "caption vector has width " +
                                                        std::to_string(texts[i].size()) + ", expected " +
                                                        std::to_string(d));
    }
    for (std::size_t k = 0; k < d; ++k) e.at(i, k) = static_cast<T>(texts[i][k]);
  }
  const nn::Var v_var = nn::project_text(text_graph, text_bound, text_graph.constant(std::move(e)));
  const auto v_vals = text_graph.value(v_var).data();
  std::vector<double> v(v_vals.begin(), v_vals.end());

  auto lr = loss::contrastive_loss(z, v, n, u, temperature, form, groups);

  PipelineResult<T> result;
  result.loss = lr.loss;
  result.similarity = std::move(lr.similarity);
  result.grads = nn::BasicModelParams<T>::zeros(params.config);

  nn::BasicTensor<T> dv(nn::Shape{n, u});
  for (std::size_t k = 0; k < n * u; ++k) dv[k] = static_cast<T>(lr.grad_v[k]);
  text_graph.backward(v_var, dv);
  nn::accumulate_grads(text_graph, text_bound, result.grads);

  const std::size_t chunks = std::max<std::size_t>(1, std::min(std::max<std::size_t>(threads, 1), n));
  std::vector<nn::BasicModelParams<T>> chunk_grads(chunks, nn::BasicModelParams<T>::zeros(params.config));
  parallel_chunks(n, threads, [&](std::size_t t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      PointGraph& pg = *point_graphs[i];
      nn::BasicTensor<T> dz(nn::Shape{1, u});
      for (std::size_t k = 0; k < u; ++k) dz[k] = static_cast<T>(lr.grad_z[i * u + k]);
      pg.graph.backward(pg.z, dz);
      nn::accumulate_grads(pg.graph, pg.bound, chunk_grads[t]);
      point_graphs[i].reset();
    }
  });
  for (const auto& g : chunk_grads) add_into(result.grads, g);
  return result;
}

template PipelineResult<float> pipeline_loss(const nn::BasicModelParams<float>&,
                                             std::span<const dataset::PointCloud>,
                                             std::span<const std::vector<double>>, double, loss::LossForm,
                                             std::span<const std::size_t>, std::size_t);
template PipelineResult<double> pipeline_loss(const nn::BasicModelParams<double>&,
                                              std::span<const dataset::PointCloud>,
                                              std::span<const std::vector<double>>, double, loss::LossForm,
                                              std::span<const std::size_t>, std::size_t);

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t epoch) {
  return dir / ("ckpt_epoch_" + std::to_string(epoch) + ".bin");
}

TrainResult train(const scenegen::ObjectBank& bank, const semantics::EmbeddingTable& table,
                  const TrainConfig& cfg, std::size_t iterations_per_epoch, const TrainHooks& hooks) {
  cfg.validate();
  require(iterations_per_epoch > 0, "an epoch needs at least one iteration");
  nn::ModelConfig model = cfg.model;
  model.text_dim = table.dim();

  TrainResult result;
  result.params = nn::ModelParams::kaiming(model, derive_seed(cfg.seed, {0}));
  AdamState state = AdamState::for_params(result.params);
  const std::size_t threads = cfg.effective_threads();

  std::ofstream trace_file;
  const bool write_files = !cfg.out_dir.empty();
  if (write_files) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    trace_file.open(cfg.out_dir / "loss_trace.csv", std::ios::binary | std::ios::trunc);
    if (!trace_file) {
      throw TrainError(TrainError::Code::kTraceWrite,
                       "cannot write " + (cfg.out_dir / "loss_trace.csv").string());
    }
    trace_file << "epoch,iteration,loss,lr\n";
  }

  const auto save = [&](std::size_t epoch) {
    if (!write_files) return;
    const auto path = checkpoint_path(cfg.out_dir, epoch);
    try {
      nn::save_checkpoint(path, result.params);
    } catch (const nn::CheckpointError& e) {
      throw TrainError(TrainError::Code::kCheckpointWrite, "epoch " + std::to_string(epoch) + ": " + e.what());
    }
    result.checkpoints.push_back(path);
  };

  std::size_t total_iterations = 0;
  double best_score = -INFINITY;
  std::size_t best_epoch = 0;
  bool budget_hit = false;

  for (std::size_t epoch = 0; epoch < cfg.epochs && !budget_hit; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    for (std::size_t it = 0; it < iterations_per_epoch; ++it) {
      if (cfg.max_iterations && total_iterations >= *cfg.max_iterations) {
        budget_hit = true;
        break;
      }
      const auto batch =
          scenegen::generate_batch(bank, cfg.scene, cfg.batch_size, derive_seed(cfg.seed, {1, epoch, it}), threads);
      std::vector<dataset::PointCloud> clouds;
      std::vector<std::vector<double>> texts;
      std::vector<std::string> captions;
      clouds.reserve(batch.size());
      for (const auto& sample : batch) {
        clouds.push_back(scenegen::prepare_for_encoder(sample, cfg.scene_normalization));
        texts.push_back(table.lookup(sample.prompt_text));
        captions.push_back(sample.prompt_text);
      }
      const auto groups = caption_groups(captions);
      const std::span<const std::size_t> loss_groups =
          cfg.shared_caption_positives ? std::span<const std::size_t>(groups) : std::span<const std::size_t>();

      const auto step =
          pipeline_loss<float>(result.params, clouds, texts, cfg.temperature, cfg.loss_form, loss_groups, threads);
      adam_step(result.params, step.grads, state, lr, cfg.adam);

      TraceRow row{epoch, it, step.loss, lr, retrieval_accuracy(step.similarity, groups)};
      if (write_files) {
        trace_file << format_trace_row(row);
        trace_file.flush();
      }
      if (hooks.on_iteration) hooks.on_iteration(row);
      result.trace.push_back(row);
      ++total_iterations;
    }
    if (budget_hit && (total_iterations == 0 || result.trace.back().epoch != epoch)) break;
    result.epochs_run = epoch + 1;
    save(epoch);

    if (cfg.early_stop_patience > 0 && hooks.validation_score) {
      const double score = hooks.validation_score(result.params, epoch);
      if (score > best_score) {
        best_score = score;
        best_epoch = epoch;
      } else if (epoch - best_epoch >= cfg.early_stop_patience) {
        result.stopped_early = true;
        break;
      }
    }
  }
  return result;
}

TrainResult train(const dataset::SeenUnseenSplit& split, const semantics::EmbeddingTable& table,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  const auto bank = scenegen::ObjectBank::from_split(split);
  const std::size_t items = std::max<std::size_t>(split.train_items.size(), 1);
  const std::size_t iterations = (items + cfg.batch_size - 1) / cfg.batch_size;
  return train(bank, table, cfg, iterations, hooks);
}

}  // namespace scenezsl::train
