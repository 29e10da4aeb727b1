#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenezsl/cli/toy.hpp"
#include "scenezsl/eval/evaluate.hpp"
#include "scenezsl/semantics/coverage.hpp"
#include "scenezsl/train/trainer.hpp"

// Subcommand implementations behind the scenezsl binary. Each takes fully
// parsed options; runtime failures are thrown.
namespace scenezsl::cli {

/// Bad flag combinations detected after parsing (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PrepareOptions {
  std::filesystem::path raw_dir;
  std::filesystem::path out_dir;
  std::size_t n_points = 1024;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct PrepareSummary {
  std::size_t converted = 0;
  std::vector<std::string> errors;  ///< "<relative path>: <reason>"
};

/// Converts raw_dir/<class>/**/*.off into normalized PCB1 clouds under
/// out_dir, mirroring the layout. Per-file seeds are derived from the global
/// seed and the file's relative path. Writes "split_template.txt" (every
/// class seen; files under a "test" directory go to [test], the rest to
/// [train]) and "prepare_manifest.json".
PrepareSummary cmd_prepare(const PrepareOptions& options, std::ostream& log);

struct GenScenesOptions {
  std::filesystem::path split;
  std::filesystem::path out_dir;
  std::size_t count = 16;
  std::uint64_t seed = 0;
  scenegen::SceneParams scene;
  std::size_t threads = 1;
};

/// Writes scene_<index>.pcb files and captions.tsv
/// ("<index>\t<prompt>\t<template id>\t<classA>[,<classB>]").
void cmd_gen_scenes(const GenScenesOptions& options, std::ostream& log);

struct TrainCommandOptions {
  std::filesystem::path split;
  std::filesystem::path table;
  std::filesystem::path out_dir;
  /// Rerun a recorded job: config and inputs come from here.
  std::filesystem::path manifest;
  train::TrainConfig config;
};

/// Writes run_manifest.json before the first step, then trains (trace and
/// per-epoch checkpoints in out_dir) and saves final.bin.
train::TrainResult cmd_train(const TrainCommandOptions& options, std::ostream& log);

struct EvalCommandOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path split;
  std::filesystem::path table;
  /// JSON report destination; defaults to eval_<mode>.json beside the
  /// checkpoint.
  std::filesystem::path report;
  eval::EvalOptions eval;
};

eval::EvalReport cmd_eval(const EvalCommandOptions& options, std::ostream& out);

enum class AblationAxis { kBatch, kAlpha, kEmbedding };

struct AblateOptions {
  AblationAxis axis = AblationAxis::kBatch;
  std::filesystem::path split;
  std::vector<std::filesystem::path> tables;
  std::filesystem::path out_csv;
  train::TrainConfig config;
  std::vector<std::size_t> batch_values{8, 16, 32, 64, 100};
  eval::Averaging averaging = eval::Averaging::kMacro;
};

/// One training + evaluation run per axis value. CSV columns:
/// axis,value,acc_u,acc_s,hm,final_loss (acc_s and hm blank when the split
/// has no seen-class held-out items). Returns the CSV text.
std::string cmd_ablate(const AblateOptions& options, std::ostream& log);

struct CoverageOptions {
  std::filesystem::path split;
  std::filesystem::path table;
};

semantics::CoverageReport cmd_check_coverage(const CoverageOptions& options, std::ostream& out);

struct MakeToyOptions {
  std::string kind = "primitives";  ///< primitives | attributes
  std::filesystem::path out_dir;
  ToyOptions toy;
};

void cmd_make_toy(const MakeToyOptions& options, std::ostream& log);

}  // namespace scenezsl::cli
