#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scenezsl/dataset/point_cloud.hpp"
#include "scenezsl/dataset/split.hpp"
#include "scenezsl/loss/contrastive.hpp"
#include "scenezsl/nn/model.hpp"
#include "scenezsl/scenegen/scene.hpp"
#include "scenezsl/semantics/embedding_table.hpp"
#include "scenezsl/train/optimizer.hpp"

namespace scenezsl::train {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  LrSchedule lr;
  AdamConfig adam;
  double temperature = 0.1;
  loss::LossForm loss_form = loss::LossForm::kCrossModal;
  /// Treat batch rows with identical captions as shared positives.
  bool shared_caption_positives = true;
  scenegen::SceneParams scene;
  scenegen::SceneNormalization scene_normalization = scenegen::SceneNormalization::kNone;
  /// text_dim is taken from the embedding table at train time.
  nn::ModelConfig model;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// Forces one thread.
  bool strict = false;
  /// Stop after this many iterations in total (a checkpoint is still written).
  std::optional<std::size_t> max_iterations;
  /// Early stop when the validation hook has not improved for this many
  /// epochs; 0 disables it.
  std::size_t early_stop_patience = 0;
  /// Receives loss_trace.csv and ckpt_epoch_<k>.bin; empty writes nothing.
  std::filesystem::path out_dir;

  /// Throws TrainError(kBadConfig).
  void validate() const;
  std::size_t effective_threads() const noexcept { return strict || threads == 0 ? 1 : threads; }
};

double lr_at(std::size_t epoch, const TrainConfig& cfg);

struct TraceRow {
  std::size_t epoch = 0;
  std::size_t iteration = 0;  ///< within the epoch
  double loss = 0.0;
  double lr = 0.0;
  double retrieval = 0.0;  ///< in-batch top-1 point-to-caption accuracy, [0, 1]

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// CSV with header "epoch,iteration,loss,lr"; values are printed with
/// round-trip precision.
std::string format_trace(std::span<const TraceRow> trace);
std::string format_trace_row(const TraceRow& row);

/// Mean loss per epoch, indexed by epoch.
std::vector<double> epoch_mean_losses(std::span<const TraceRow> trace);
/// Mean in-batch retrieval accuracy per epoch.
std::vector<double> epoch_mean_retrieval(std::span<const TraceRow> trace);

/// Group id per caption: the index of its first occurrence.
std::vector<std::size_t> caption_groups(std::span<const std::string> captions);

/// Share of rows whose most similar column (lowest index on ties) is in the
/// row's own group.
double retrieval_accuracy(const loss::SimilarityMatrix& sim, std::span<const std::size_t> groups);

template <typename T>
struct PipelineResult {
  double loss = 0.0;
  nn::BasicModelParams<T> grads;
  loss::SimilarityMatrix similarity;
};

/// Full forward and backward for one batch: clouds through the encoder and
/// point head, table vectors through the text head, contrastive loss, and
/// the gradient of the loss for every parameter. Per-sample work is spread
/// over `threads` contiguous chunks; chunk gradients are summed in chunk
/// order.
template <typename T>
PipelineResult<T> pipeline_loss(const nn::BasicModelParams<T>& params,
                                std::span<const dataset::PointCloud> clouds,
                                std::span<const std::vector<double>> texts, double temperature,
                                loss::LossForm form, std::span<const std::size_t> groups,
                                std::size_t threads);

extern template PipelineResult<float> pipeline_loss(const nn::BasicModelParams<float>&,
                                                    std::span<const dataset::PointCloud>,
                                                    std::span<const std::vector<double>>, double,
                                                    loss::LossForm, std::span<const std::size_t>,
                                                    std::size_t);
extern template PipelineResult<double> pipeline_loss(const nn::BasicModelParams<double>&,
                                                     std::span<const dataset::PointCloud>,
                                                     std::span<const std::vector<double>>, double,
                                                     loss::LossForm, std::span<const std::size_t>,
                                                     std::size_t);

struct TrainHooks {
  /// Higher is better; called after every epoch when early stopping is on.
  std::function<double(const nn::ModelParams&, std::size_t epoch)> validation_score;
  std::function<void(const TraceRow&)> on_iteration;
};

struct TrainResult {
  nn::ModelParams params;
  std::vector<TraceRow> trace;
  std::size_t epochs_run = 0;
  bool stopped_early = false;
  std::vector<std::filesystem::path> checkpoints;
};

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t epoch);

/// Trains on scenes generated from `bank`. Every iteration draws a fresh
/// batch with seed derive_seed(cfg.seed, {1, epoch, iteration}); parameters
/// start from Kaiming init with derive_seed(cfg.seed, {0}). The table is only
/// read.
TrainResult train(const scenegen::ObjectBank& bank, const semantics::EmbeddingTable& table,
                  const TrainConfig& cfg, std::size_t iterations_per_epoch,
                  const TrainHooks& hooks = {});

/// Loads the split's seen training objects; an epoch is
/// ceil(|train items| / batch_size) batches.
TrainResult train(const dataset::SeenUnseenSplit& split, const semantics::EmbeddingTable& table,
                  const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace scenezsl::train
