#include "scenezsl/cli/app.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>

#include "scenezsl/cli/commands.hpp"
#include "scenezsl/cli/manifest.hpp"

namespace scenezsl::cli {

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::vector<CLI::Option*> seed_opts;  ///< one per subcommand; only one is ever parsed
  std::size_t threads = 1;
  bool strict = false;
};

void add_common(CLI::App* cmd, Common& c) {
  c.seed_opts.push_back(cmd->add_option("--seed", c.seed, "Global seed (falls back to $SCENEZSL_SEED, then 0)"));
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--strict", c.strict, "Single thread, bitwise reproducible");
}

// Applies the SCENEZSL_SEED fallback when --seed was not given.
std::uint64_t resolve_seed(const Common& c) {
  for (const auto* opt : c.seed_opts) {
    if (opt->count() > 0) return c.seed;
  }
  if (const char* env = std::getenv("SCENEZSL_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw UsageError(std::string("SCENEZSL_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

std::size_t resolve_threads(const Common& c) { return c.strict ? 1 : c.threads; }

struct SceneFlags {
  std::string rotation = "yaw";
};

void add_scene_flags(CLI::App* cmd, scenegen::SceneParams& p, SceneFlags& f) {
  cmd->add_option("--alpha-small", p.alpha_small, "Scale for \"small\" captions")->capture_default_str();
  cmd->add_option("--alpha-big", p.alpha_big, "Scale for \"big\" captions")->capture_default_str();
  cmd->add_option("--points", p.n_points, "Points per scene")->capture_default_str();
  cmd->add_option("--jitter", p.jitter_sigma, "Jitter sigma")->capture_default_str();
  cmd->add_option("--rotation", f.rotation, "Augmentation rotation")
      ->check(CLI::IsMember({"none", "yaw"}))
      ->capture_default_str();
}

void apply_scene_flags(scenegen::SceneParams& p, const SceneFlags& f) {
  p.rotation = f.rotation == "none" ? scenegen::Rotation::kNone : scenegen::Rotation::kYawOnly;
}

struct TrainFlags {
  SceneFlags scene;
  std::string scene_norm = "none";
  std::string loss_form = "cross_modal";
  bool distinct_captions = false;
  std::size_t max_iterations = 0;
  CLI::Option* max_iterations_opt = nullptr;
};

void add_train_flags(CLI::App* cmd, train::TrainConfig& c, TrainFlags& f) {
  cmd->add_option("--epochs", c.epochs)->capture_default_str();
  cmd->add_option("--batch", c.batch_size)->capture_default_str();
  cmd->add_option("--lr", c.lr.lr0, "Initial learning rate")->capture_default_str();
  cmd->add_option("--lr-decay", c.lr.factor, "Multiplicative decay")->capture_default_str();
  cmd->add_option("--lr-every", c.lr.every, "Epochs between decays")->capture_default_str();
  cmd->add_option("--beta1", c.adam.beta1)->capture_default_str();
  cmd->add_option("--beta2", c.adam.beta2)->capture_default_str();
  cmd->add_option("--adam-eps", c.adam.eps)->capture_default_str();
  cmd->add_option("--tau", c.temperature, "Softmax temperature")->capture_default_str();
  cmd->add_option("--loss", f.loss_form, "Loss form")
      ->check(CLI::IsMember({"cross_modal", "concatenated"}))
      ->capture_default_str();
  cmd->add_flag("--distinct-captions", f.distinct_captions,
                "Do not share positives between identical captions in a batch");
  cmd->add_option("--scene-norm", f.scene_norm, "Scene normalization before encoding")
      ->check(CLI::IsMember({"none", "unit_sphere"}))
      ->capture_default_str();
  add_scene_flags(cmd, c.scene, f.scene);
  cmd->add_option("--encoder-widths", c.model.encoder_widths, "Per-point MLP widths, starting at 3")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--point-hidden", c.model.point_hidden)->capture_default_str();
  cmd->add_option("--text-hidden1", c.model.text_hidden1)->capture_default_str();
  cmd->add_option("--text-hidden2", c.model.text_hidden2)->capture_default_str();
  cmd->add_option("--embed-dim", c.model.embed_dim)->capture_default_str();
  f.max_iterations_opt = cmd->add_option("--max-iterations", f.max_iterations, "Stop after this many steps");
  cmd->add_option("--patience", c.early_stop_patience, "Early-stop patience in epochs (0 = off)")
      ->capture_default_str();
}

void apply_train_flags(train::TrainConfig& c, const TrainFlags& f, const Common& common) {
  apply_scene_flags(c.scene, f.scene);
  c.scene_normalization =
      f.scene_norm == "none" ? scenegen::SceneNormalization::kNone : scenegen::SceneNormalization::kUnitSphere;
  c.loss_form = f.loss_form == "cross_modal" ? loss::LossForm::kCrossModal : loss::LossForm::kConcatenated;
  c.shared_caption_positives = !f.distinct_captions;
  if (f.max_iterations_opt->count() > 0) c.max_iterations = f.max_iterations;
  c.seed = resolve_seed(common);
  c.threads = resolve_threads(common);
  c.strict = common.strict;
  try {
    c.validate();
    c.model.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot point-cloud classification with prompt-guided scene synthesis", "scenezsl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  Common common;

  PrepareOptions prepare;
  auto* prepare_cmd = app.add_subcommand("prepare", "Sample OFF meshes into normalized PCB1 clouds");
  prepare_cmd->add_option("--raw", prepare.raw_dir, "Directory of class folders with OFF files")->required();
  prepare_cmd->add_option("--out", prepare.out_dir, "Output directory")->required();
  prepare_cmd->add_option("--points", prepare.n_points, "Points per object")->capture_default_str();
  add_common(prepare_cmd, common);

  GenScenesOptions gen;
  SceneFlags gen_scene;
  auto* gen_cmd = app.add_subcommand("gen-scenes", "Dump synthetic scenes and their captions");
  gen_cmd->add_option("--split", gen.split, "Split manifest")->required();
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--count", gen.count, "Number of scenes")->capture_default_str();
  add_scene_flags(gen_cmd, gen.scene, gen_scene);
  add_common(gen_cmd, common);

  TrainCommandOptions train_opts;
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train encoder and projection heads");
  train_cmd->add_option("--split", train_opts.split, "Split manifest");
  train_cmd->add_option("--table", train_opts.table, "Embedding table (JSONL)");
  train_cmd->add_option("--out", train_opts.out_dir, "Run directory")->required();
  train_cmd->add_option("--manifest", train_opts.manifest, "Rerun from a run_manifest.json");
  add_train_flags(train_cmd, train_opts.config, train_flags);
  add_common(train_cmd, common);

  EvalCommandOptions eval_opts;
  std::string eval_mode = "zsl";
  bool eval_micro = false;
  auto* eval_cmd = app.add_subcommand("eval", "ZSL / GZSL evaluation of a checkpoint");
  eval_cmd->add_option("--ckpt", eval_opts.checkpoint, "Checkpoint")->required();
  eval_cmd->add_option("--split", eval_opts.split, "Split manifest")->required();
  eval_cmd->add_option("--table", eval_opts.table, "Embedding table (JSONL)")->required();
  eval_cmd->add_option("--mode", eval_mode)->check(CLI::IsMember({"zsl", "gzsl"}))->capture_default_str();
  eval_cmd->add_flag("--micro", eval_micro, "Micro-average instead of per-class mean");
  eval_cmd->add_option("--report", eval_opts.report, "JSON report path");
  add_common(eval_cmd, common);

  AblateOptions ablate;
  TrainFlags ablate_flags;
  std::string ablate_axis;
  auto* ablate_cmd = app.add_subcommand("ablate", "Sweep one hyperparameter axis");
  ablate_cmd->add_option("--axis", ablate_axis)->check(CLI::IsMember({"batch", "alpha", "embedding"}))->required();
  ablate_cmd->add_option("--split", ablate.split, "Split manifest")->required();
  ablate_cmd->add_option("--table", ablate.tables, "Embedding table; repeat for --axis embedding")->required();
  ablate_cmd->add_option("--out", ablate.out_csv, "CSV output path")->required();
  add_train_flags(ablate_cmd, ablate.config, ablate_flags);
  add_common(ablate_cmd, common);

  CoverageOptions coverage;
  auto* coverage_cmd = app.add_subcommand("check-coverage", "Check a table against a split's prompt universe");
  coverage_cmd->add_option("--split", coverage.split, "Split manifest")->required();
  coverage_cmd->add_option("--table", coverage.table, "Embedding table (JSONL)")->required();

  MakeToyOptions toy;
  auto* toy_cmd = app.add_subcommand("make-toy", "Write a procedural toy dataset");
  toy_cmd->add_option("--kind", toy.kind)->check(CLI::IsMember({"primitives", "attributes"}))->capture_default_str();
  toy_cmd->add_option("--out", toy.out_dir, "Output directory")->required();
  toy_cmd->add_option("--train-per-class", toy.toy.train_per_class)->capture_default_str();
  toy_cmd->add_option("--test-per-class", toy.toy.test_per_class)->capture_default_str();
  toy_cmd->add_option("--points", toy.toy.n_points)->capture_default_str();
  toy_cmd->add_option("--dim", toy.toy.table_dim, "Embedding width")->capture_default_str();
  add_common(toy_cmd, common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (prepare_cmd->parsed()) {
      prepare.seed = resolve_seed(common);
      prepare.threads = resolve_threads(common);
      return cmd_prepare(prepare, err).errors.empty() ? 0 : 1;
    }
    if (gen_cmd->parsed()) {
      apply_scene_flags(gen.scene, gen_scene);
      gen.seed = resolve_seed(common);
      gen.threads = resolve_threads(common);
      cmd_gen_scenes(gen, err);
      return 0;
    }
    if (train_cmd->parsed()) {
      apply_train_flags(train_opts.config, train_flags, common);
      cmd_train(train_opts, err);
      return 0;
    }
    if (eval_cmd->parsed()) {
      eval_opts.eval.mode = eval_mode == "zsl" ? eval::EvalMode::kZsl : eval::EvalMode::kGzsl;
      eval_opts.eval.averaging = eval_micro ? eval::Averaging::kMicro : eval::Averaging::kMacro;
      eval_opts.eval.threads = resolve_threads(common);
      cmd_eval(eval_opts, out);
      return 0;
    }
    if (ablate_cmd->parsed()) {
      apply_train_flags(ablate.config, ablate_flags, common);
      ablate.axis = ablate_axis == "batch"   ? AblationAxis::kBatch
                    : ablate_axis == "alpha" ? AblationAxis::kAlpha
                                             : AblationAxis::kEmbedding;
      out << cmd_ablate(ablate, err);
      return 0;
    }
    if (coverage_cmd->parsed()) {
      return cmd_check_coverage(coverage, out).complete() ? 0 : 1;
    }
    if (toy_cmd->parsed()) {
      toy.toy.seed = resolve_seed(common);
      cmd_make_toy(toy, err);
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace scenezsl::cli
