#include "scenezsl/cli/commands.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "scenezsl/cli/manifest.hpp"
#include "scenezsl/dataset/mesh.hpp"
#include "scenezsl/nn/checkpoint.hpp"
#include "scenezsl/parallel.hpp"
#include "scenezsl/rng.hpp"

namespace scenezsl::cli {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint32_t crc_of(std::string_view s) {
  return static_cast<std::uint32_t>(
      ::crc32(::crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size())));
}

bool has_test_component(const std::filesystem::path& rel) {
  for (const auto& part : rel.parent_path()) {
    if (part == "test") return true;
  }
  return false;
}

}  // namespace

PrepareSummary cmd_prepare(const PrepareOptions& options, std::ostream& log) {
  if (!std::filesystem::is_directory(options.raw_dir)) {
    throw std::runtime_error("raw directory " + options.raw_dir.string() + " does not exist");
  }
  if (options.n_points == 0) throw UsageError("--points must be positive");

  struct Job {
    std::string class_name;
    std::filesystem::path rel;  // relative to raw_dir
  };
  std::vector<Job> jobs;
  std::vector<std::string> classes;
  for (const auto& entry : std::filesystem::directory_iterator(options.raw_dir)) {
    if (entry.is_directory()) classes.push_back(entry.path().filename().string());
  }
  std::sort(classes.begin(), classes.end());
  for (const auto& cls : classes) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(options.raw_dir / cls)) {
      if (entry.is_regular_file() && entry.path().extension() == ".off") {
        files.push_back(std::filesystem::relative(entry.path(), options.raw_dir));
      }
    }
    std::sort(files.begin(), files.end());
    for (auto& f : files) jobs.push_back({cls, std::move(f)});
  }

  std::vector<std::string> outcome(jobs.size());  // empty on success
  parallel_for(jobs.size(), std::max<std::size_t>(options.threads, 1), [&](std::size_t i) {
    const auto& job = jobs[i];
    const std::string rel = job.rel.generic_string();
    try {
      const auto mesh = dataset::read_off((options.raw_dir / job.rel).string());
      const auto cloud = dataset::normalize_unit_sphere(
          dataset::sample_points(mesh, options.n_points, derive_seed(options.seed, {crc_of(rel)})));
      auto out_path = options.out_dir / job.rel;
      out_path.replace_extension(".pcb");
      std::filesystem::create_directories(out_path.parent_path());
      dataset::write_pcb1(out_path.string(), cloud);
    } catch (const std::exception& e) {
      outcome[i] = rel + ": " + e.what();
    }
  });

  PrepareSummary summary;
  dataset::SeenUnseenSplit templ;
  templ.seen_classes = classes;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!outcome[i].empty()) {
      summary.errors.push_back(outcome[i]);
      continue;
    }
    ++summary.converted;
    auto rel = jobs[i].rel;
    rel.replace_extension(".pcb");
    dataset::SplitItem item{rel.generic_string(), jobs[i].class_name};
    (has_test_component(jobs[i].rel) ? templ.test_items : templ.train_items).push_back(item);
    files.push_back({{"source", jobs[i].rel.generic_string()},
                     {"output", item.path},
                     {"digest", file_digest(options.out_dir / rel)}});
  }
  std::filesystem::create_directories(options.out_dir);
  write_text(options.out_dir / "split_template.txt", dataset::format_split(templ));
  nlohmann::ordered_json manifest;
  manifest["tool"] = "scenezsl";
  manifest["version"] = tool_version();
  manifest["n_points"] = options.n_points;
  manifest["seed"] = options.seed;
  manifest["converted"] = summary.converted;
  manifest["failed"] = summary.errors.size();
  manifest["files"] = files;
  manifest["errors"] = summary.errors;
  write_text(options.out_dir / "prepare_manifest.json", manifest.dump(2) + "\n");

  for (const auto& e : summary.errors) log << "error: " << e << "\n";
  log << "converted " << summary.converted << " of " << jobs.size() << " files, " << summary.errors.size()
      << " failed\n";
  return summary;
}

void cmd_gen_scenes(const GenScenesOptions& options, std::ostream& log) {
  const auto split = dataset::load_split(options.split);
  const auto bank = scenegen::ObjectBank::from_split(split);
  const auto samples = scenegen::generate_batch(bank, options.scene, options.count, options.seed,
                                                std::max<std::size_t>(options.threads, 1));
  std::filesystem::create_directories(options.out_dir);
  std::string captions;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    char name[64];
    std::snprintf(name, sizeof(name), "scene_%06zu.pcb", i);
    dataset::write_pcb1((options.out_dir / name).string(), s.cloud);
    captions += std::to_string(i) + "\t" + s.prompt_text + "\t" + std::to_string(s.record.template_id) + "\t" +
                s.record.class_a;
    if (s.record.class_b) captions += "," + *s.record.class_b;
    captions += "\n";
  }
  write_text(options.out_dir / "captions.tsv", captions);
  log << "wrote " << samples.size() << " scenes to " << options.out_dir.string() << "\n";
}

train::TrainResult cmd_train(const TrainCommandOptions& options, std::ostream& log) {
  RunManifest manifest;
  if (!options.manifest.empty()) {
    std::ifstream in(options.manifest, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + options.manifest.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    manifest = manifest_from_json(buffer.str());
    verify_inputs(manifest);
  } else {
    if (options.split.empty() || options.table.empty()) throw UsageError("train needs --split and --table");
    const auto table = semantics::load_table(options.table);
    train::TrainConfig config = options.config;
    config.model.text_dim = table.dim();
    manifest = make_manifest(options.split, options.table, config);
  }
  if (options.out_dir.empty()) throw UsageError("train needs --out");

  train::TrainConfig config = manifest.config;
  config.out_dir = options.out_dir;
  std::filesystem::create_directories(options.out_dir);
  write_text(options.out_dir / "run_manifest.json", manifest_to_json(manifest));

  const auto split = dataset::load_split(manifest.split);
  const auto table = semantics::load_table(manifest.table);
  const auto coverage = semantics::check_split_coverage(table, split);
  if (!coverage.complete()) {
    throw std::runtime_error("table does not cover " + std::to_string(coverage.missing.size()) +
                             " prompts of the split, e.g. \"" + coverage.missing.front() + "\"");
  }

  train::TrainHooks hooks;
  if (config.early_stop_patience > 0) {
    // Held-out seen items classified among the seen classes.
    hooks.validation_score = [&](const nn::ModelParams& params, std::size_t) {
      const auto bank = eval::build_label_bank(split.seen_classes, table, params);
      std::vector<std::pair<std::size_t, std::size_t>> outcomes;
      for (const auto& item : split.valid_items) {
        const auto c = split.seen_index(item.class_name);
        if (!c) continue;
        const auto cloud = dataset::normalize_unit_sphere(dataset::read_pcb1(split.resolve(item).string()));
        outcomes.emplace_back(*c, eval::predict(params, cloud, bank));
      }
      if (outcomes.empty()) return 0.0;
      std::size_t hits = 0;
      for (auto [t, p] : outcomes) hits += t == p ? 1 : 0;
      return static_cast<double>(hits) / static_cast<double>(outcomes.size());
    };
  }
  // Per-epoch summary lines.
  std::size_t current_epoch = 0;
  double loss_sum = 0.0, retrieval_sum = 0.0;
  std::size_t rows = 0;
  const auto flush_epoch = [&] {
    if (rows == 0) return;
    char line[160];
    std::snprintf(line, sizeof(line), "epoch %zu loss %.4f retrieval %.3f\n", current_epoch,
                  loss_sum / static_cast<double>(rows), retrieval_sum / static_cast<double>(rows));
    log << line;
    loss_sum = retrieval_sum = 0.0;
    rows = 0;
  };
  hooks.on_iteration = [&](const train::TraceRow& row) {
    if (row.epoch != current_epoch) flush_epoch();
    current_epoch = row.epoch;
    loss_sum += row.loss;
    retrieval_sum += row.retrieval;
    ++rows;
  };

  auto result = train::train(split, table, config, hooks);
  flush_epoch();
  nn::save_checkpoint(options.out_dir / "final.bin", result.params);
  log << "trained " << result.trace.size() << " iterations over " << result.epochs_run << " epochs\n";
  return result;
}

eval::EvalReport cmd_eval(const EvalCommandOptions& options, std::ostream& out) {
  const auto params = nn::load_checkpoint(options.checkpoint);
  const auto split = dataset::load_split(options.split);
  const auto table = semantics::load_table(options.table);
  const auto report = eval::evaluate(params, split, table, options.eval);
  auto path = options.report;
  if (path.empty()) {
    path = options.checkpoint.parent_path() / ("eval_" + std::string(eval::to_string(options.eval.mode)) + ".json");
  }
  write_text(path, eval::report_json(report));
  out << eval::report_table(report);
  return report;
}

std::string cmd_ablate(const AblateOptions& options, std::ostream& log) {
  if (options.tables.empty()) throw UsageError("ablate needs at least one --table");
  if (options.axis != AblationAxis::kEmbedding && options.tables.size() > 1) {
    throw UsageError("several --table flags only make sense with --axis embedding");
  }
  const auto split = dataset::load_split(options.split);

  struct Run {
    std::string value;
    train::TrainConfig config;
    std::filesystem::path table;
  };
  std::vector<Run> runs;
  std::string axis_name;
  switch (options.axis) {
    case AblationAxis::kBatch:
      axis_name = "batch";
      for (std::size_t b : options.batch_values) {
        Run r{std::to_string(b), options.config, options.tables.front()};
        r.config.batch_size = b;
        runs.push_back(r);
      }
      break;
    case AblationAxis::kAlpha:
      axis_name = "alpha";
      for (auto [small, big] : scenegen::kAlphaGrid) {
        Run r{shortest(small) + "/" + shortest(big), options.config, options.tables.front()};
        r.config.scene.alpha_small = small;
        r.config.scene.alpha_big = big;
        runs.push_back(r);
      }
      break;
    case AblationAxis::kEmbedding:
      axis_name = "embedding";
      for (const auto& t : options.tables) runs.push_back({t.stem().string(), options.config, t});
      break;
  }

  std::string csv = "axis,value,acc_u,acc_s,hm,final_loss\n";
  for (auto& run : runs) {
    const auto table = semantics::load_table(run.table);
    run.config.out_dir.clear();
    log << axis_name << "=" << run.value << ": training\n";
    const auto result = train::train(split, table, run.config);
    const auto zsl = eval::evaluate(result.params, split, table, {eval::EvalMode::kZsl, options.averaging,
                                                                  run.config.effective_threads()});
    std::string acc_s, hm;
    try {
      const auto gzsl = eval::evaluate(result.params, split, table, {eval::EvalMode::kGzsl, options.averaging,
                                                                     run.config.effective_threads()});
      acc_s = shortest(*gzsl.acc_s);
      hm = shortest(*gzsl.hm);
    } catch (const eval::EvalError& e) {
      if (e.code() != eval::EvalError::Code::kEmptyTestSet) throw;
    }
    const auto means = train::epoch_mean_losses(result.trace);
    csv += axis_name + "," + run.value + "," + shortest(zsl.acc_u) + "," + acc_s + "," + hm + "," +
           (means.empty() ? std::string() : shortest(means.back())) + "\n";
  }
  if (!options.out_csv.empty()) {
    if (options.out_csv.has_parent_path()) std::filesystem::create_directories(options.out_csv.parent_path());
    write_text(options.out_csv, csv);
  }
  return csv;
}

semantics::CoverageReport cmd_check_coverage(const CoverageOptions& options, std::ostream& out) {
  const auto split = dataset::load_split(options.split);
  const auto table = semantics::load_table(options.table);
  const auto report = semantics::check_split_coverage(table, split);
  char line[128];
  std::snprintf(line, sizeof(line), "covered %zu of %zu prompts (%.2f%%)\n", report.covered(), report.total,
                100.0 * report.fraction());
  out << line;
  const std::size_t shown = std::min<std::size_t>(report.missing.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) out << "missing: " << report.missing[i] << "\n";
  if (report.missing.size() > shown) out << "... and " << report.missing.size() - shown << " more\n";
  return report;
}

void cmd_make_toy(const MakeToyOptions& options, std::ostream& log) {
  ToyDataset toy;
  if (options.kind == "primitives") {
    toy = make_primitive_toy(options.toy);
  } else if (options.kind == "attributes") {
    toy = make_attribute_toy(options.toy);
  } else {
    throw UsageError("unknown toy kind '" + options.kind + "' (primitives | attributes)");
  }
  write_toy(toy, options.out_dir);
  log << "wrote " << toy.clouds.size() << " clouds, split.txt and table.jsonl to " << options.out_dir.string()
      << "\n";
}

}  // namespace scenezsl::cli
