#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "scenezsl/nn/model.hpp"

namespace scenezsl::nn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kCheckpointMagic = "ZSLCKPT1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// ZSLCKPT1 layout (little-endian):
///   magic "ZSLCKPT1" | u32 version | u32 tensor count |
///   per tensor: u32 name length, UTF-8 name, u32 rank, rank x u32 dims,
///               f32 payload |
///   u32 CRC-32 over the concatenated f32 payloads.
std::string encode_checkpoint(const ModelParams& params);

/// Rebuilds parameters and their ModelConfig from the stored shapes.
ModelParams decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace scenezsl::nn
