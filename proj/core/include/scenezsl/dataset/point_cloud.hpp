#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scenezsl/dataset/mesh.hpp"

namespace scenezsl::dataset {

/// Ordered point set. Coordinates are kept in double precision in memory;
/// the on-disk PCB1 format stores f32.
struct PointCloud {
  std::vector<Vec3> points;
  std::optional<int> class_id;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

enum class CloudErrc {
  kZeroTotalArea,
  kDegenerateCloud,
  kEmptyCloud,
  kBadFormat,
  kIo,
};

std::string_view to_string(CloudErrc code) noexcept;

class CloudError : public std::runtime_error {
 public:
  CloudError(CloudErrc code, const std::string& detail);
  CloudErrc code() const noexcept { return code_; }

 private:
  CloudErrc code_;
};

/// Draws n points uniformly over the surface: a face is picked with
/// probability proportional to its area, then a point is placed with uniform
/// barycentric coordinates. Deterministic in (mesh, n, seed).
PointCloud sample_points(const Mesh& mesh, std::size_t n, std::uint64_t seed);

/// Centers on the centroid and scales so the farthest point has norm 1.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

Vec3 centroid(std::span<const Vec3> points) noexcept;
double max_norm(std::span<const Vec3> points) noexcept;

/// Radius of the smallest origin-centered ball around the centroid, i.e.
/// max ||p - centroid||.
double bounding_radius(std::span<const Vec3> points) noexcept;

// PCB1: magic "PCB1", u32 LE point count, then 3n LE f32 (x,y,z interleaved).
std::string encode_pcb1(const PointCloud& cloud);
PointCloud decode_pcb1(std::string_view bytes);
void write_pcb1(const std::string& path, const PointCloud& cloud);
PointCloud read_pcb1(const std::string& path);

}  // namespace scenezsl::dataset
