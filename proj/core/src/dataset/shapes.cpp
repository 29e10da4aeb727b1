#include "scenezsl/dataset/shapes.hpp"

#include <cmath>
#include <numbers>

namespace scenezsl::dataset::shapes {

namespace {

constexpr double kPi = std::numbers::pi;

double signed_pow(double base, double exponent) {
  return std::copysign(std::pow(std::abs(base), exponent), base);
}

std::uint32_t u32(std::size_t v) { return static_cast<std::uint32_t>(v); }

// Ring i (of `rings` rings) and segment j on a closed band.
void add_band(Mesh& mesh, std::size_t ring_a, std::size_t ring_b, std::size_t segments) {
  for (std::size_t j = 0; j < segments; ++j) {
    const std::size_t k = (j + 1) % segments;
    const auto a0 = u32(ring_a + j), a1 = u32(ring_a + k);
    const auto b0 = u32(ring_b + j), b1 = u32(ring_b + k);
    mesh.faces.push_back({a0, b0, b1});
    mesh.faces.push_back({a0, b1, a1});
  }
}

void add_fan(Mesh& mesh, std::size_t center, std::size_t ring, std::size_t segments, bool flip) {
  for (std::size_t j = 0; j < segments; ++j) {
    const std::size_t k = (j + 1) % segments;
    if (flip) {
      mesh.faces.push_back({u32(center), u32(ring + k), u32(ring + j)});
    } else {
      mesh.faces.push_back({u32(center), u32(ring + j), u32(ring + k)});
    }
  }
}

}  // namespace

Mesh box(double hx, double hy, double hz) {
  Mesh mesh;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.push_back({(i & 1) ? hx : -hx, (i & 2) ? hy : -hy, (i & 4) ? hz : -hz});
  }
  const std::uint32_t quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                                     {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    mesh.faces.push_back({q[0], q[1], q[2]});
    mesh.faces.push_back({q[0], q[2], q[3]});
  }
  return mesh;
}

Mesh cylinder(double radius, double half_height, std::size_t segments) {
  Mesh mesh;
  for (double z : {-half_height, half_height}) {
    for (std::size_t j = 0; j < segments; ++j) {
      const double phi = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(segments);
      mesh.vertices.push_back({radius * std::cos(phi), radius * std::sin(phi), z});
    }
  }
  add_band(mesh, 0, segments, segments);
  const std::size_t bottom = mesh.vertices.size();
  mesh.vertices.push_back({0.0, 0.0, -half_height});
  const std::size_t top = mesh.vertices.size();
  mesh.vertices.push_back({0.0, 0.0, half_height});
  add_fan(mesh, bottom, 0, segments, true);
  add_fan(mesh, top, segments, segments, false);
  return mesh;
}

Mesh cone(double radius, double half_height, std::size_t segments) {
  Mesh mesh;
  for (std::size_t j = 0; j < segments; ++j) {
    const double phi = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(segments);
    mesh.vertices.push_back({radius * std::cos(phi), radius * std::sin(phi), -half_height});
  }
  const std::size_t apex = mesh.vertices.size();
  mesh.vertices.push_back({0.0, 0.0, half_height});
  const std::size_t base = mesh.vertices.size();
  mesh.vertices.push_back({0.0, 0.0, -half_height});
  add_fan(mesh, apex, 0, segments, false);
  add_fan(mesh, base, 0, segments, true);
  return mesh;
}

Mesh superellipsoid(double ax, double ay, double az, double e_lat, double e_lon,
                    std::size_t rings, std::size_t segments) {
  Mesh mesh;
  // Interior latitude rings; the poles are single vertices.
  for (std::size_t i = 1; i < rings; ++i) {
    const double v = -kPi / 2.0 + kPi * static_cast<double>(i) / static_cast<double>(rings);
    const double cv = signed_pow(std::cos(v), e_lat);
    const double sv = signed_pow(std::sin(v), e_lat);
    for (std::size_t j = 0; j < segments; ++j) {
      const double u = -kPi + 2.0 * kPi * static_cast<double>(j) / static_cast<double>(segments);
      mesh.vertices.push_back({ax * cv * signed_pow(std::cos(u), e_lon),
                               ay * cv * signed_pow(std::sin(u), e_lon), az * sv});
    }
  }
  for (std::size_t i = 0; i + 2 < rings; ++i) {
    add_band(mesh, i * segments, (i + 1) * segments, segments);
  }
  const std::size_t south = mesh.vertices.size();
  mesh.vertices.push_back({0.0, 0.0, -az});
  const std::size_t north = mesh.vertices.size();
  mesh.vertices.push_back({0.0, 0.0, az});
  add_fan(mesh, south, 0, segments, true);
  add_fan(mesh, north, (rings - 2) * segments, segments, false);
  return mesh;
}

Mesh torus(double major, double minor, std::size_t rings, std::size_t segments) {
  Mesh mesh;
  for (std::size_t i = 0; i < rings; ++i) {
    const double theta = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(rings);
    for (std::size_t j = 0; j < segments; ++j) {
      const double phi = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(segments);
      const double r = major + minor * std::cos(phi);
      mesh.vertices.push_back({r * std::cos(theta), r * std::sin(theta), minor * std::sin(phi)});
    }
  }
  for (std::size_t i = 0; i < rings; ++i) {
    add_band(mesh, i * segments, ((i + 1) % rings) * segments, segments);
  }
  return mesh;
}

}  // namespace scenezsl::dataset::shapes
