#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "scenezsl/dataset/split.hpp"
#include "scenezsl/train/trainer.hpp"

namespace scenezsl::cli {

/// Everything needed to rerun a training job: the fully resolved config,
/// the inputs it read, and their digests.
struct RunManifest {
  std::string tool_version;
  std::filesystem::path split;
  std::filesystem::path table;
  train::TrainConfig config;
  /// "crc32:<8 hex digits>" keyed by "split", "table" and "train_items".
  std::map<std::string, std::string> digests;
};

std::string tool_version();

/// CRC-32 of a file's bytes as "crc32:xxxxxxxx".
std::string file_digest(const std::filesystem::path& path);
/// CRC-32 over the concatenated bytes of the split's train item files.
std::string train_items_digest(const dataset::SeenUnseenSplit& split);

std::string manifest_to_json(const RunManifest& manifest);
/// Throws std::runtime_error on malformed or incomplete documents.
RunManifest manifest_from_json(std::string_view text);

RunManifest make_manifest(const std::filesystem::path& split_path, const std::filesystem::path& table_path,
                          const train::TrainConfig& config);
/// Throws std::runtime_error naming the first input whose digest changed.
void verify_inputs(const RunManifest& manifest);

}  // namespace scenezsl::cli
