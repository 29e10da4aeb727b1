#include "scenezsl/cli/toy.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <stdexcept>

#include "scenezsl/dataset/shapes.hpp"
#include "scenezsl/rng.hpp"
#include "scenezsl/scenegen/prompts.hpp"
#include "scenezsl/semantics/coverage.hpp"

namespace scenezsl::cli {

namespace {

using MeshMaker = std::function<dataset::Mesh(Philox&)>;

struct ToyClass {
  std::string name;
  bool seen;
  MeshMaker make;
};

std::vector<double> gaussian(Philox& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal();
  return v;
}

// Samples objects for every class and fills the split's class and item lists.
ToyDataset build_objects(const std::vector<ToyClass>& classes, const ToyOptions& options) {
  ToyDataset toy;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& cls = classes[c];
    (cls.seen ? toy.split.seen_classes : toy.split.unseen_classes).push_back(cls.name);
    const std::size_t count = cls.seen ? options.train_per_class : options.test_per_class;
    for (std::size_t i = 0; i < count; ++i) {
      Philox rng(derive_seed(options.seed, {c, i, 0}));
      const dataset::Mesh mesh = cls.make(rng);
      auto cloud = dataset::normalize_unit_sphere(
          dataset::sample_points(mesh, options.n_points, derive_seed(options.seed, {c, i, 1})));
      char file[64];
      std::snprintf(file, sizeof(file), "%04zu.pcb", i);
      const std::string path = cls.name + "/" + file;
      (cls.seen ? toy.split.train_items : toy.split.test_items).push_back({path, cls.name});
      toy.clouds.emplace_back(path, std::move(cloud));
    }
  }
  return toy;
}

double jitter(Philox& rng, double base, double rel) { return base * rng.uniform(1.0 - rel, 1.0 + rel); }

constexpr std::array<const char*, 8> kSeenNames{"alpha", "bravo",   "charlie", "delta",
                                                "echo",  "foxtrot", "golf",    "hotel"};
constexpr std::array<const char*, 3> kUnseenNames{"india", "juliet", "kilo"};
constexpr std::array<std::array<double, 3>, 3> kUnseenAttributes{{{0.5, 0.0, 0.0}, {0.0, 1.0, 0.5}, {1.0, 0.5, 1.0}}};

dataset::Mesh attribute_mesh(const std::array<double, 3>& theta, Philox& rng) {
  const double spread = 0.08;
  const double t0 = theta[0] + rng.uniform(-spread, spread);
  const double t1 = theta[1] + rng.uniform(-spread, spread);
  const double t2 = theta[2] + rng.uniform(-spread, spread);
  const double az = 0.5 + 1.0 * t0;
  const double ay = 1.0 - 0.5 * t1;
  const double e = 0.2 + 1.3 * t2;
  return dataset::shapes::superellipsoid(1.0, ay, az, e, e, 16, 24);
}

}  // namespace

std::array<double, 3> toy_attributes(const std::string& class_name) {
  for (std::size_t c = 0; c < kSeenNames.size(); ++c) {
    if (class_name == kSeenNames[c]) {
      return {static_cast<double>(c & 1), static_cast<double>((c >> 1) & 1), static_cast<double>((c >> 2) & 1)};
    }
  }
  for (std::size_t c = 0; c < kUnseenNames.size(); ++c) {
    if (class_name == kUnseenNames[c]) return kUnseenAttributes[c];
  }
  throw std::invalid_argument("not an attribute-toy class: " + class_name);
}

ToyDataset make_primitive_toy(const ToyOptions& options) {
  const std::vector<ToyClass> classes{
      {"sphere", true,
       [](Philox& rng) {
         return dataset::shapes::superellipsoid(jitter(rng, 1.0, 0.1), jitter(rng, 1.0, 0.1),
                                                jitter(rng, 1.0, 0.1), 1.0, 1.0, 16, 24);
       }},
      {"cube", true,
       [](Philox& rng) {
         return dataset::shapes::box(jitter(rng, 1.0, 0.1), jitter(rng, 1.0, 0.1), jitter(rng, 1.0, 0.1));
       }},
      {"cylinder", true,
       [](Philox& rng) { return dataset::shapes::cylinder(jitter(rng, 0.5, 0.1), jitter(rng, 1.0, 0.1), 24); }},
      {"cone", false,
       [](Philox& rng) { return dataset::shapes::cone(jitter(rng, 1.0, 0.1), jitter(rng, 1.0, 0.1), 24); }},
  };
  ToyDataset toy = build_objects(classes, options);
  toy.table = semantics::EmbeddingTable(options.table_dim, semantics::TableKind::kContextual);
  Philox rng(derive_seed(options.seed, {0x7AB1E}));
  for (const auto& prompt : semantics::split_prompt_universe(toy.split)) {
    toy.table.insert(prompt, gaussian(rng, options.table_dim));
  }
  return toy;
}

ToyDataset make_attribute_toy(const ToyOptions& options) {
  std::vector<ToyClass> classes;
  for (const char* name : kSeenNames) {
    const auto theta = toy_attributes(name);
    classes.push_back({name, true, [theta](Philox& rng) { return attribute_mesh(theta, rng); }});
  }
  for (const char* name : kUnseenNames) {
    const auto theta = toy_attributes(name);
    classes.push_back({name, false, [theta](Philox& rng) { return attribute_mesh(theta, rng); }});
  }
  ToyDataset toy = build_objects(classes, options);

  const std::size_t dim = options.table_dim;
  toy.table = semantics::EmbeddingTable(dim, semantics::TableKind::kWordAverage);
  Philox rng(derive_seed(options.seed, {0x7AB1E}));
  const auto base = gaussian(rng, dim);
  std::array<std::vector<double>, 3> directions{gaussian(rng, dim), gaussian(rng, dim), gaussian(rng, dim)};

  std::set<std::string> class_words;
  const auto add_class = [&](const std::string& name) {
    const auto theta = toy_attributes(name);
    std::vector<double> w = base;
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t i = 0; i < dim; ++i) w[i] += theta[k] * directions[k][i];
    }
    toy.table.insert(name, w);
    // Plural forms share the singular vector.
    toy.table.insert(scenegen::pluralize(name), w);
    class_words.insert(name);
    class_words.insert(scenegen::pluralize(name));
  };
  for (const auto& c : toy.split.seen_classes) add_class(c);
  for (const auto& c : toy.split.unseen_classes) add_class(c);

  std::set<std::string> other_words;
  for (const auto& prompt : semantics::split_prompt_universe(toy.split)) {
    for (auto& word : semantics::EmbeddingTable::tokenize(prompt)) {
      if (!class_words.contains(word)) other_words.insert(word);
    }
  }
  for (const auto& word : other_words) toy.table.insert(word, gaussian(rng, dim));
  return toy;
}

void write_toy(const ToyDataset& toy, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [path, cloud] : toy.clouds) {
    const auto full = dir / path;
    std::filesystem::create_directories(full.parent_path());
    dataset::write_pcb1(full.string(), cloud);
  }
  const auto write_text = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  };
  write_text(dir / "split.txt", dataset::format_split(toy.split));
  write_text(dir / "table.jsonl", semantics::format_table(toy.table));
}

}  // namespace scenezsl::cli
