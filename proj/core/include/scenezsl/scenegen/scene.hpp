#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenezsl/dataset/point_cloud.hpp"
#include "scenezsl/dataset/split.hpp"
#include "scenezsl/scenegen/prompts.hpp"

namespace scenezsl::scenegen {

using dataset::PointCloud;
using dataset::Vec3;

enum class Rotation { kNone, kYawOnly };

/// Placement gaps, in normalized units, for the relation rules.
struct GapRange {
  double lo;
  double hi;
};

struct SceneParams {
  double alpha_small = 0.5;
  double alpha_big = 2.0;
  std::size_t n_points = 1024;
  double jitter_sigma = 0.01;
  Rotation rotation = Rotation::kYawOnly;

  GapRange close_gap{0.05, 0.25};
  GapRange pair_gap{0.3, 0.8};
  double center_jitter = 0.1;  ///< horizontal slack for on/under

  /// Throws std::invalid_argument unless 0 < alpha_small < 1 < alpha_big,
  /// n_points > 0 and jitter_sigma >= 0.
  void validate() const;
};

/// The (alpha_small, alpha_big) grid searched during validation.
inline constexpr std::pair<double, double> kAlphaGrid[] = {
    {0.2, 5.0}, {0.3, 3.0}, {0.5, 2.0}, {0.7, 1.5}};

struct SceneRecord {
  int template_id = 0;
  std::string class_a;
  std::optional<std::string> class_b;  ///< set for two-class templates
  double alpha_a = 1.0;
  double alpha_b = 1.0;
  Vec3 beta_a{0.0, 0.0, 0.0};
  Vec3 beta_b{0.0, 0.0, 0.0};
  std::uint64_t seed = 0;

  friend bool operator==(const SceneRecord&, const SceneRecord&) = default;
};

struct SceneSample {
  PointCloud cloud;
  std::string prompt_text;
  SceneRecord record;
  /// 0 for points taken from the first operand, 1 for the second.
  std::vector<std::uint8_t> operand_of_point;
};

/// Re-renders the caption from a generation record.
std::string render_record(const SceneRecord& record);

class SceneError : public std::runtime_error {
 public:
  enum class Code { kArityMismatch, kDegenerateOperand, kInsufficientClasses };
  SceneError(Code code, const std::string& detail);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Random augmentation T: optional yaw about z, then per-coordinate Gaussian
/// jitter clipped to +-3 sigma. Identity when sigma == 0 and rotation is off.
PointCloud apply_augmentation(const PointCloud& cloud, const SceneParams& params,
                              std::uint64_t seed);

struct Operand {
  const PointCloud& cloud;
  std::string class_name;
};

/// Builds one scene: each operand becomes alpha * T(X) + beta with alpha from
/// the template's size tag (first operand only) and beta from its relation;
/// two-operand unions are subsampled without replacement to n_points.
SceneSample compose_scene(const PromptTemplate& tmpl, const Operand& a,
                          const std::optional<Operand>& b, const SceneParams& params,
                          std::uint64_t seed);

/// Normalized training objects grouped by class.
struct ObjectBank {
  std::vector<std::string> classes;
  std::vector<std::vector<PointCloud>> objects;  ///< objects[c] for classes[c]

  std::size_t total_objects() const noexcept;

  void add(const std::string& class_name, PointCloud cloud);

  /// Loads the PCB1 files of the split's train items, normalizes them, and
  /// keeps the seen classes in manifest order.
  static ObjectBank from_split(const dataset::SeenUnseenSplit& split);
};

/// Draws batch_size scenes: template uniform over the ten, classes uniform
/// over the bank (distinct for two-class templates, the same class for the
/// pair templates), objects uniform within a class.
std::vector<SceneSample> generate_batch(const ObjectBank& bank, const SceneParams& params,
                                        std::size_t batch_size, std::uint64_t seed,
                                        std::size_t threads = 1);

/// How a composed scene is mapped into encoder input.
enum class SceneNormalization { kNone, kUnitSphere };

PointCloud prepare_for_encoder(const SceneSample& sample, SceneNormalization mode);

}  // namespace scenezsl::scenegen
