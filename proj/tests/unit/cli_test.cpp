#include <gtest/gtest.h>

#include <sstream>

#include "scenezsl/cli/app.hpp"
#include "scenezsl/cli/manifest.hpp"
#include "scenezsl/cli/toy.hpp"
#include "scenezsl/dataset/mesh.hpp"
#include "scenezsl/dataset/shapes.hpp"
#include "scenezsl/semantics/coverage.hpp"
#include "test_support.hpp"

namespace scenezsl::cli {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> tiny_train_flags() {
  return {"--epochs", "1", "--batch", "4", "--points", "32", "--encoder-widths", "3,8,16", "--point-hidden", "8",
          "--text-hidden1", "8", "--text-hidden2", "8", "--embed-dim", "4"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"eval", "--ckpt", "x"}).code, 2);
  EXPECT_EQ(run_cli({"eval", "--ckpt", "x", "--split", "y", "--table", "z", "--mode", "both"}).code, 2);
  const auto missing = run_cli({"check-coverage", "--split", "/nonexistent/split.txt", "--table", "t.jsonl"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_FALSE(missing.err.empty());
}

TEST(Cli, PrepareConvertsAndReportsCorruptFiles) {
  TempDir dir("prepare");
  const auto raw = dir / "raw";
  write_file(raw / "box" / "train" / "a.off", dataset::write_off(dataset::shapes::box(1, 2, 3)));
  write_file(raw / "box" / "test" / "b.off", dataset::write_off(dataset::shapes::box(2, 1, 1)));
  write_file(raw / "cone" / "train" / "c.off", dataset::write_off(dataset::shapes::cone()));
  const std::vector<std::string> args{"prepare", "--raw", raw.string(), "--out", (dir / "out").string(),
                                      "--points", "64", "--seed", "5"};
  const auto ok = run_cli(args);
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto cloud = dataset::read_pcb1((dir / "out" / "box" / "train" / "a.pcb").string());
  EXPECT_EQ(cloud.size(), 64u);
  EXPECT_NEAR(dataset::max_norm(cloud.points), 1.0, 1e-6);
  const auto split = dataset::load_split(dir / "out" / "split_template.txt");
  EXPECT_EQ(split.seen_classes, (std::vector<std::string>{"box", "cone"}));
  EXPECT_EQ(split.train_items.size(), 2u);
  EXPECT_EQ(split.test_items.size(), 1u);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "prepare_manifest.json"));

  const std::string first = read_file(dir / "out" / "cone" / "train" / "c.pcb");
  const auto again = run_cli({"prepare", "--raw", raw.string(), "--out", (dir / "out2").string(), "--points", "64",
                              "--seed", "5"});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(read_file(dir / "out2" / "cone" / "train" / "c.pcb"), first);

  write_file(raw / "cone" / "train" / "c.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n");
  const auto bad = run_cli({"prepare", "--raw", raw.string(), "--out", (dir / "out3").string(), "--points", "64"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("c.off"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "out3" / "box" / "train" / "a.pcb"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out3" / "box" / "test" / "b.pcb"));
  EXPECT_FALSE(std::filesystem::exists(dir / "out3" / "cone" / "train" / "c.pcb"));
}

TEST(Cli, ToyCoverageGenScenes) {
  TempDir dir("toy");
  const auto toy = (dir / "toy").string();
  ASSERT_EQ(run_cli({"make-toy", "--out", toy, "--train-per-class", "3", "--test-per-class", "2", "--points", "32",
                     "--dim", "8"})
                .code,
            0);
  const auto coverage = run_cli({"check-coverage", "--split", toy + "/split.txt", "--table", toy + "/table.jsonl"});
  EXPECT_EQ(coverage.code, 0) << coverage.out;

  const auto scenes = run_cli({"gen-scenes", "--split", toy + "/split.txt", "--out", (dir / "scenes").string(),
                               "--count", "5", "--points", "48", "--seed", "3"});
  ASSERT_EQ(scenes.code, 0) << scenes.err;
  const std::string captions = read_file(dir / "scenes" / "captions.tsv");
  EXPECT_EQ(std::count(captions.begin(), captions.end(), '\n'), 5);
  EXPECT_EQ(dataset::read_pcb1((dir / "scenes" / "scene_000004.pcb").string()).size(), 48u);

  // Drop one label prompt: coverage fails with exit 1.
  auto table = semantics::load_table(toy + "/table.jsonl");
  semantics::EmbeddingTable partial(table.dim(), table.kind());
  for (const auto& [text, vec] : table.entries()) {
    if (text != "This is a cone.") partial.insert(text, vec);
  }
  write_file(dir / "partial.jsonl", semantics::format_table(partial));
  const auto missing = run_cli({"check-coverage", "--split", toy + "/split.txt", "--table", (dir / "partial.jsonl").string()});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.out.find("This is a cone."), std::string::npos);
}

TEST(Cli, TrainEvalAndManifestRerun) {
  TempDir dir("train");
  ToyOptions options;
  options.train_per_class = 4;
  options.test_per_class = 2;
  options.n_points = 32;
  options.table_dim = 6;
  write_toy(make_primitive_toy(options), dir / "toy");
  const auto split = (dir / "toy" / "split.txt").string();
  const auto table = (dir / "toy" / "table.jsonl").string();

  const auto train_args = concat({"train", "--split", split, "--table", table, "--strict", "--seed", "7"},
                                 tiny_train_flags());
  const auto a = run_cli(concat(train_args, {"--out", (dir / "a").string()}));
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run_cli(concat(train_args, {"--out", (dir / "b").string()}));
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_file(dir / "a" / "loss_trace.csv"), read_file(dir / "b" / "loss_trace.csv"));
  EXPECT_EQ(read_file(dir / "a" / "final.bin"), read_file(dir / "b" / "final.bin"));
  EXPECT_EQ(read_file(dir / "a" / "ckpt_epoch_0.bin"), read_file(dir / "a" / "final.bin"));

  const auto manifest = manifest_from_json(read_file(dir / "a" / "run_manifest.json"));
  EXPECT_EQ(manifest.config.seed, 7u);
  EXPECT_EQ(manifest.config.model.text_dim, 6u);
  EXPECT_EQ(manifest.digests.size(), 3u);

  const auto rerun = run_cli({"train", "--manifest", (dir / "a" / "run_manifest.json").string(), "--out",
                              (dir / "c").string()});
  ASSERT_EQ(rerun.code, 0) << rerun.err;
  EXPECT_EQ(read_file(dir / "c" / "loss_trace.csv"), read_file(dir / "a" / "loss_trace.csv"));
  EXPECT_EQ(read_file(dir / "c" / "final.bin"), read_file(dir / "a" / "final.bin"));

  const auto eval = run_cli({"eval", "--ckpt", (dir / "a" / "final.bin").string(), "--split", split, "--table",
                             table, "--mode", "zsl"});
  ASSERT_EQ(eval.code, 0) << eval.err;
  const std::string report = read_file(dir / "a" / "eval_zsl.json");
  EXPECT_NE(report.find("\"acc_u\""), std::string::npos);
  EXPECT_EQ(report.find("\"acc_s\""), std::string::npos);
  EXPECT_EQ(report.find("\"hm\""), std::string::npos);

  // Changing an input invalidates the manifest.
  write_file(table, read_file(table) + "\n");
  EXPECT_EQ(run_cli({"train", "--manifest", (dir / "a" / "run_manifest.json").string(), "--out",
                     (dir / "d").string()})
                .code,
            1);
}

TEST(Cli, AblateAlphaWritesFourRows) {
  TempDir dir("ablate");
  ToyOptions options;
  options.train_per_class = 3;
  options.test_per_class = 2;
  options.n_points = 32;
  options.table_dim = 6;
  write_toy(make_primitive_toy(options), dir / "toy");
  const auto r = run_cli(concat({"ablate", "--axis", "alpha", "--split", (dir / "toy" / "split.txt").string(),
                                 "--table", (dir / "toy" / "table.jsonl").string(), "--out",
                                 (dir / "alpha.csv").string(), "--max-iterations", "1"},
                                tiny_train_flags()));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir / "alpha.csv");
  EXPECT_EQ(csv.rfind("axis,value,acc_u,acc_s,hm,final_loss\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  for (const char* pair : {"0.2/5", "0.3/3", "0.5/2", "0.7/1.5"}) EXPECT_NE(csv.find(pair), std::string::npos);
}

TEST(Cli, SeedFromEnvironment) {
  TempDir dir("env");
  ToyOptions options;
  options.train_per_class = 2;
  options.test_per_class = 1;
  options.n_points = 16;
  write_toy(make_primitive_toy(options), dir / "toy");
  ::setenv("SCENEZSL_SEED", "not-a-number", 1);
  const auto bad = run_cli({"gen-scenes", "--split", (dir / "toy" / "split.txt").string(), "--out",
                            (dir / "s").string(), "--count", "1"});
  EXPECT_EQ(bad.code, 2);
  ::setenv("SCENEZSL_SEED", "11", 1);
  ASSERT_EQ(run_cli({"gen-scenes", "--split", (dir / "toy" / "split.txt").string(), "--out", (dir / "s1").string(),
                     "--count", "2", "--points", "16"})
                .code,
            0);
  ::unsetenv("SCENEZSL_SEED");
  ASSERT_EQ(run_cli({"gen-scenes", "--split", (dir / "toy" / "split.txt").string(), "--out", (dir / "s2").string(),
                     "--count", "2", "--points", "16", "--seed", "11"})
                .code,
            0);
  EXPECT_EQ(read_file(dir / "s1" / "captions.tsv"), read_file(dir / "s2" / "captions.tsv"));
  EXPECT_EQ(read_file(dir / "s1" / "scene_000001.pcb"), read_file(dir / "s2" / "scene_000001.pcb"));
}

TEST(Toy, AttributeTableIsStructured) {
  ToyOptions options;
  options.train_per_class = 1;
  options.test_per_class = 1;
  options.n_points = 16;
  const auto toy = make_attribute_toy(options);
  EXPECT_EQ(toy.split.seen_classes.size(), 8u);
  EXPECT_EQ(toy.split.unseen_classes.size(), 3u);
  EXPECT_TRUE(semantics::check_split_coverage(toy.table, toy.split).complete());
  // Each unseen class word is an affine mix of the seen corner words.
  const auto word = [&](const std::string& w) { return toy.table.lookup(w); };
  const auto india = word("india"), alpha = word("alpha"), bravo = word("bravo");
  for (std::size_t i = 0; i < india.size(); ++i) EXPECT_NEAR(india[i], 0.5 * alpha[i] + 0.5 * bravo[i], 1e-12);
  EXPECT_EQ(word("kilos"), word("kilo"));
}

}  // namespace
}  // namespace scenezsl::cli
