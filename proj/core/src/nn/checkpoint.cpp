#include "scenezsl/nn/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace scenezsl::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint is truncated");
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    std::memcpy(&v, take(4).data(), 4);
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_update(std::uint32_t crc, std::string_view bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::string encode_checkpoint(const ModelParams& params) {
  std::string out(kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  const auto tensors = params.named();
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  std::uint32_t crc = static_cast<std::uint32_t>(::crc32(0L, Z_NULL, 0));
  for (const auto& [name, tensor] : tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(tensor->rank()));
    for (std::size_t d : tensor->shape()) put_u32(out, static_cast<std::uint32_t>(d));
    const std::string_view payload(reinterpret_cast<const char*>(tensor->data().data()),
                                   tensor->size() * sizeof(float));
    out += payload;
    crc = crc_update(crc, payload);
  }
  put_u32(out, crc);
  return out;
}

ModelParams decode_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw CheckpointError("not a ZSLCKPT1 checkpoint");
  }
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32();
  std::map<std::string, Tensor> tensors;
  std::uint32_t crc = static_cast<std::uint32_t>(::crc32(0L, Z_NULL, 0));
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name(in.take(in.u32()));
    const std::uint32_t rank = in.u32();
    if (rank == 0 || rank > 2) throw CheckpointError("tensor '" + name + "' has unsupported rank");
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(in.u32());
    const std::size_t n = Tensor::element_count(shape);
    if (n > in.remaining() / sizeof(float)) throw CheckpointError("checkpoint is truncated");
    const std::string_view payload = in.take(n * sizeof(float));
    crc = crc_update(crc, payload);
    std::vector<float> data(n);
    std::memcpy(data.data(), payload.data(), payload.size());
    if (!tensors.emplace(name, Tensor(shape, std::move(data))).second) {
      throw CheckpointError("duplicate tensor '" + name + "'");
    }
  }
  if (in.u32() != crc) throw CheckpointError("checkpoint CRC mismatch");
  if (in.remaining() != 0) throw CheckpointError("trailing bytes after checkpoint");

  const auto get = [&](const std::string& name) -> const Tensor& {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw CheckpointError("checkpoint lacks '" + name + "'");
    return it->second;
  };

  ModelConfig config;
  config.encoder_widths = {3};
  for (std::size_t i = 0; tensors.contains("encoder." + std::to_string(i) + ".weight"); ++i) {
    config.encoder_widths.push_back(get("encoder." + std::to_string(i) + ".weight").dim(1));
  }
  config.point_hidden = get("point_head.0.weight").dim(1);
  config.embed_dim = get("point_head.1.weight").dim(1);
  config.text_dim = get("text_head.0.weight").dim(0);
  config.text_hidden1 = get("text_head.0.weight").dim(1);
  config.text_hidden2 = get("text_head.1.weight").dim(1);

  ModelParams params = ModelParams::zeros(config);
  for (auto& [name, tensor] : params.named()) {
    const Tensor& stored = get(name);
    if (stored.shape() != tensor->shape()) {
      throw CheckpointError("tensor '" + name + "' has shape " + shape_string(stored.shape()) +
                            ", expected " + shape_string(tensor->shape()));
    }
    *tensor = stored;
  }
  if (params.named().size() != tensors.size()) {
    throw CheckpointError("checkpoint holds unexpected tensors");
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  const std::string bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw CheckpointError("cannot write checkpoint '" + path.string() + "'");
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return decode_checkpoint(buffer.str());
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

}  // namespace scenezsl::nn
