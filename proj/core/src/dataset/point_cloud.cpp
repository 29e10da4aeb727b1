#include "scenezsl/dataset/point_cloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "scenezsl/rng.hpp"

namespace scenezsl::dataset {

static_assert(std::endian::native == std::endian::little,
              "PCB1 encoding assumes a little-endian host");

std::string_view to_string(CloudErrc code) noexcept {
  switch (code) {
    case CloudErrc::kZeroTotalArea: return "ZeroTotalArea";
    case CloudErrc::kDegenerateCloud: return "DegenerateCloud";
    case CloudErrc::kEmptyCloud: return "EmptyCloud";
    case CloudErrc::kBadFormat: return "BadFormat";
    case CloudErrc::kIo: return "Io";
  }
  return "Unknown";
}

CloudError::CloudError(CloudErrc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

PointCloud sample_points(const Mesh& mesh, std::size_t n, std::uint64_t seed) {
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (const Triangle& face : mesh.faces) {
    total += triangle_area(mesh, face);
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) {
    throw CloudError(CloudErrc::kZeroTotalArea, "mesh has no face with positive area");
  }

  Philox rng(seed);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    const Triangle& face = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];

    // sqrt warp gives uniform density over the triangle.
    const double s = std::sqrt(rng.uniform());
    const double t = rng.uniform();
    const double wa = 1.0 - s;
    const double wb = s * (1.0 - t);
    const double wc = s * t;
    const Vec3& a = mesh.vertices[face[0]];
    const Vec3& b = mesh.vertices[face[1]];
    const Vec3& c = mesh.vertices[face[2]];
    cloud.points.push_back({wa * a[0] + wb * b[0] + wc * c[0],
                            wa * a[1] + wb * b[1] + wc * c[1],
                            wa * a[2] + wb * b[2] + wc * c[2]});
  }
  return cloud;
}

Vec3 centroid(std::span<const Vec3> points) noexcept {
  Vec3 c{0.0, 0.0, 0.0};
  if (points.empty()) return c;
  for (const Vec3& p : points) {
    c[0] += p[0];
    c[1] += p[1];
    c[2] += p[2];
  }
  const double inv = 1.0 / static_cast<double>(points.size());
  return {c[0] * inv, c[1] * inv, c[2] * inv};
}

double max_norm(std::span<const Vec3> points) noexcept {
  double best = 0.0;
  for (const Vec3& p : points) {
    best = std::max(best, std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
  }
  return best;
}

double bounding_radius(std::span<const Vec3> points) noexcept {
  const Vec3 c = centroid(points);
  double best = 0.0;
  for (const Vec3& p : points) {
    const double dx = p[0] - c[0], dy = p[1] - c[1], dz = p[2] - c[2];
    best = std::max(best, std::sqrt(dx * dx + dy * dy + dz * dz));
  }
  return best;
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  if (cloud.empty()) {
    throw CloudError(CloudErrc::kEmptyCloud, "cannot normalize an empty cloud");
  }
  const Vec3 c = centroid(cloud.points);
  PointCloud out;
  out.class_id = cloud.class_id;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) {
    out.points.push_back({p[0] - c[0], p[1] - c[1], p[2] - c[2]});
  }
  const double radius = max_norm(out.points);
  if (!(radius > 0.0)) {
    throw CloudError(CloudErrc::kDegenerateCloud, "all points coincide");
  }
  double scale = radius;
  // Rounding can leave the farthest point a few ulps outside the unit ball.
  for (int pass = 0; pass < 4 && scale != 1.0; ++pass) {
    for (Vec3& p : out.points) {
      p = {p[0] / scale, p[1] / scale, p[2] / scale};
    }
    const double after = max_norm(out.points);
    scale = after > 1.0 ? after : 1.0;
  }
  return out;
}

std::string encode_pcb1(const PointCloud& cloud) {
  const auto n = static_cast<std::uint32_t>(cloud.size());
  std::string bytes(8 + 12 * static_cast<std::size_t>(n), '\0');
  std::memcpy(bytes.data(), "PCB1", 4);
  std::memcpy(bytes.data() + 4, &n, 4);
  char* out = bytes.data() + 8;
  for (const Vec3& p : cloud.points) {
    for (double coord : p) {
      const auto value = static_cast<float>(coord);
      std::memcpy(out, &value, 4);
      out += 4;
    }
  }
  return bytes;
}

PointCloud decode_pcb1(std::string_view bytes) {
  if (bytes.size() < 8 || bytes.substr(0, 4) != "PCB1") {
    throw CloudError(CloudErrc::kBadFormat, "missing PCB1 magic");
  }
  std::uint32_t n = 0;
  std::memcpy(&n, bytes.data() + 4, 4);
  if (bytes.size() != 8 + 12 * static_cast<std::size_t>(n)) {
    throw CloudError(CloudErrc::kBadFormat, "PCB1 payload size does not match point count " +
                                                std::to_string(n));
  }
  PointCloud cloud;
  cloud.points.resize(n);
  const char* in = bytes.data() + 8;
  for (Vec3& p : cloud.points) {
    for (double& coord : p) {
      float value = 0.0f;
      std::memcpy(&value, in, 4);
      in += 4;
      if (!std::isfinite(value)) {
        throw CloudError(CloudErrc::kBadFormat, "PCB1 contains a non-finite coordinate");
      }
      coord = value;
    }
  }
  return cloud;
}

void write_pcb1(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  const std::string bytes = encode_pcb1(cloud);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw CloudError(CloudErrc::kIo, "cannot write '" + path + "'");
  }
}

PointCloud read_pcb1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CloudError(CloudErrc::kIo, "cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return decode_pcb1(buffer.str());
  } catch (const CloudError& e) {
    throw CloudError(e.code(), path + ": " + e.what());
  }
}

}  // namespace scenezsl::dataset
