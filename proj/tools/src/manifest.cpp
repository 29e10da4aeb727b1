#include "scenezsl/cli/manifest.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#ifndef SCENEZSL_VERSION
#define SCENEZSL_VERSION "0.0.0"
#endif

namespace scenezsl::cli {

using nlohmann::ordered_json;

namespace {

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::uint32_t crc_update(std::uint32_t crc, const std::string& bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::string format_crc(std::uint32_t crc) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "crc32:%08x", crc);
  return buf;
}

std::string_view rotation_name(scenegen::Rotation r) { return r == scenegen::Rotation::kNone ? "none" : "yaw"; }

std::string_view normalization_name(scenegen::SceneNormalization n) {
  return n == scenegen::SceneNormalization::kNone ? "none" : "unit_sphere";
}

std::string_view loss_form_name(loss::LossForm f) {
  return f == loss::LossForm::kCrossModal ? "cross_modal" : "concatenated";
}

template <typename T>
T enum_from(const ordered_json& j, std::initializer_list<std::pair<std::string_view, T>> options) {
  const auto name = j.get<std::string>();
  for (const auto& [key, value] : options) {
    if (key == name) return value;
  }
  throw std::runtime_error("unknown value '" + name + "'");
}

ordered_json config_to_json(const train::TrainConfig& c) {
  ordered_json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lr0"] = c.lr.lr0;
  j["lr_decay"] = c.lr.factor;
  j["lr_decay_every"] = c.lr.every;
  j["adam_beta1"] = c.adam.beta1;
  j["adam_beta2"] = c.adam.beta2;
  j["adam_eps"] = c.adam.eps;
  j["temperature"] = c.temperature;
  j["loss_form"] = loss_form_name(c.loss_form);
  j["shared_caption_positives"] = c.shared_caption_positives;
  j["scene"] = {
      {"alpha_small", c.scene.alpha_small},
      {"alpha_big", c.scene.alpha_big},
      {"n_points", c.scene.n_points},
      {"jitter_sigma", c.scene.jitter_sigma},
      {"rotation", rotation_name(c.scene.rotation)},
      {"close_gap", {c.scene.close_gap.lo, c.scene.close_gap.hi}},
      {"pair_gap", {c.scene.pair_gap.lo, c.scene.pair_gap.hi}},
      {"center_jitter", c.scene.center_jitter},
  };
  j["scene_normalization"] = normalization_name(c.scene_normalization);
  j["model"] = {
      {"encoder_widths", c.model.encoder_widths}, {"point_hidden", c.model.point_hidden},
      {"text_dim", c.model.text_dim},             {"text_hidden1", c.model.text_hidden1},
      {"text_hidden2", c.model.text_hidden2},     {"embed_dim", c.model.embed_dim},
  };
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["strict"] = c.strict;
  j["max_iterations"] = c.max_iterations ? ordered_json(*c.max_iterations) : ordered_json(nullptr);
  j["early_stop_patience"] = c.early_stop_patience;
  return j;
}

train::TrainConfig config_from_json(const ordered_json& j) {
  train::TrainConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.lr.lr0 = j.at("lr0").get<double>();
  c.lr.factor = j.at("lr_decay").get<double>();
  c.lr.every = j.at("lr_decay_every").get<std::size_t>();
  c.adam.beta1 = j.at("adam_beta1").get<double>();
  c.adam.beta2 = j.at("adam_beta2").get<double>();
  c.adam.eps = j.at("adam_eps").get<double>();
  c.temperature = j.at("temperature").get<double>();
  c.loss_form = enum_from<loss::LossForm>(
      j.at("loss_form"), {{"cross_modal", loss::LossForm::kCrossModal}, {"concatenated", loss::LossForm::kConcatenated}});
  c.shared_caption_positives = j.at("shared_caption_positives").get<bool>();
  const auto& s = j.at("scene");
  c.scene.alpha_small = s.at("alpha_small").get<double>();
  c.scene.alpha_big = s.at("alpha_big").get<double>();
  c.scene.n_points = s.at("n_points").get<std::size_t>();
  c.scene.jitter_sigma = s.at("jitter_sigma").get<double>();
  c.scene.rotation = enum_from<scenegen::Rotation>(
      s.at("rotation"), {{"none", scenegen::Rotation::kNone}, {"yaw", scenegen::Rotation::kYawOnly}});
  c.scene.close_gap = {s.at("close_gap").at(0).get<double>(), s.at("close_gap").at(1).get<double>()};
  c.scene.pair_gap = {s.at("pair_gap").at(0).get<double>(), s.at("pair_gap").at(1).get<double>()};
  c.scene.center_jitter = s.at("center_jitter").get<double>();
  c.scene_normalization = enum_from<scenegen::SceneNormalization>(
      j.at("scene_normalization"),
      {{"none", scenegen::SceneNormalization::kNone}, {"unit_sphere", scenegen::SceneNormalization::kUnitSphere}});
  const auto& m = j.at("model");
  c.model.encoder_widths = m.at("encoder_widths").get<std::vector<std::size_t>>();
  c.model.point_hidden = m.at("point_hidden").get<std::size_t>();
  c.model.text_dim = m.at("text_dim").get<std::size_t>();
  c.model.text_hidden1 = m.at("text_hidden1").get<std::size_t>();
  c.model.text_hidden2 = m.at("text_hidden2").get<std::size_t>();
  c.model.embed_dim = m.at("embed_dim").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threads = j.at("threads").get<std::size_t>();
  c.strict = j.at("strict").get<bool>();
  if (!j.at("max_iterations").is_null()) c.max_iterations = j.at("max_iterations").get<std::size_t>();
  c.early_stop_patience = j.at("early_stop_patience").get<std::size_t>();
  return c;
}

}  // namespace

std::string tool_version() { return SCENEZSL_VERSION; }

std::string file_digest(const std::filesystem::path& path) {
  return format_crc(crc_update(static_cast<std::uint32_t>(::crc32(0L, Z_NULL, 0)), read_bytes(path)));
}

std::string train_items_digest(const dataset::SeenUnseenSplit& split) {
  auto crc = static_cast<std::uint32_t>(::crc32(0L, Z_NULL, 0));
  for (const auto& item : split.train_items) crc = crc_update(crc, read_bytes(split.resolve(item)));
  return format_crc(crc);
}

std::string manifest_to_json(const RunManifest& manifest) {
  ordered_json j;
  j["tool"] = "scenezsl";
  j["version"] = manifest.tool_version;
  j["seed"] = manifest.config.seed;
  j["split"] = manifest.split.string();
  j["table"] = manifest.table.string();
  j["digests"] = manifest.digests;
  j["config"] = config_to_json(manifest.config);
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  try {
    const auto j = ordered_json::parse(text);
    RunManifest m;
    m.tool_version = j.at("version").get<std::string>();
    m.split = j.at("split").get<std::string>();
    m.table = j.at("table").get<std::string>();
    m.digests = j.at("digests").get<std::map<std::string, std::string>>();
    m.config = config_from_json(j.at("config"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed run manifest: ") + e.what());
  }
}

RunManifest make_manifest(const std::filesystem::path& split_path, const std::filesystem::path& table_path,
                          const train::TrainConfig& config) {
  RunManifest m;
  m.tool_version = tool_version();
  m.split = std::filesystem::absolute(split_path);
  m.table = std::filesystem::absolute(table_path);
  m.config = config;
  m.digests["split"] = file_digest(split_path);
  m.digests["table"] = file_digest(table_path);
  m.digests["train_items"] = train_items_digest(dataset::load_split(split_path));
  return m;
}

void verify_inputs(const RunManifest& manifest) {
  const auto check = [&](const std::string& key, const std::string& actual) {
    auto it = manifest.digests.find(key);
    if (it == manifest.digests.end()) throw std::runtime_error("run manifest lacks the " + key + " digest");
    if (it->second != actual) {
      throw std::runtime_error(key + " changed since the run was recorded (" + it->second + " vs " + actual + ")");
    }
  };
  check("split", file_digest(manifest.split));
  check("table", file_digest(manifest.table));
  check("train_items", train_items_digest(dataset::load_split(manifest.split)));
}

}  // namespace scenezsl::cli
