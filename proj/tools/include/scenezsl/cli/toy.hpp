#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "scenezsl/dataset/point_cloud.hpp"
#include "scenezsl/dataset/split.hpp"
#include "scenezsl/semantics/embedding_table.hpp"

// Procedural datasets small enough to train on a laptop CPU in seconds.
namespace scenezsl::cli {

struct ToyOptions {
  std::size_t train_per_class = 20;
  std::size_t test_per_class = 20;
  std::size_t n_points = 256;
  std::size_t table_dim = 16;
  std::uint64_t seed = 0;
};

struct ToyDataset {
  dataset::SeenUnseenSplit split;  ///< item paths are relative to the output dir
  semantics::EmbeddingTable table{1, semantics::TableKind::kContextual};
  std::vector<std::pair<std::string, dataset::PointCloud>> clouds;  ///< path -> cloud
};

/// Seen sphere, cube and cylinder; unseen cone. The table is contextual with
/// an independent Gaussian vector for every prompt of the split.
ToyDataset make_primitive_toy(const ToyOptions& options);

/// Superellipsoid classes laid out on attributes (height, y-flattening,
/// squareness) in [0, 1]^3. The 8 seen classes sit on the cube corners, the
/// 3 unseen on edge midpoints. Word-average table: a class word is
/// base + sum_k theta_k * direction_k, so an unseen word vector is a convex
/// mixture of seen ones; other words are random.
ToyDataset make_attribute_toy(const ToyOptions& options);

/// Attribute vector of an attribute-toy class, by name.
std::array<double, 3> toy_attributes(const std::string& class_name);

/// Writes the clouds as PCB1, "split.txt" and "table.jsonl" under dir.
void write_toy(const ToyDataset& toy, const std::filesystem::path& dir);

}  // namespace scenezsl::cli
