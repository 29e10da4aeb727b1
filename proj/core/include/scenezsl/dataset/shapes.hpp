#pragma once

#include <cstddef>

#include "scenezsl/dataset/mesh.hpp"

// Procedural meshes for toy datasets, tests and benchmarks.
namespace scenezsl::dataset::shapes {

/// Axis-aligned box centered at the origin with the given half extents.
Mesh box(double hx = 1.0, double hy = 1.0, double hz = 1.0);

/// Closed cylinder along z, centered at the origin.
Mesh cylinder(double radius = 1.0, double half_height = 1.0, std::size_t segments = 32);

/// Closed cone along z with its apex at +half_height.
Mesh cone(double radius = 1.0, double half_height = 1.0, std::size_t segments = 32);

/// Superellipsoid with semi-axes (ax, ay, az). The exponents control
/// squareness: 1 gives an ellipsoid, values near 0 approach a box, and
/// (small, 1) approaches a cylinder.
Mesh superellipsoid(double ax, double ay, double az, double e_lat, double e_lon,
                    std::size_t rings = 24, std::size_t segments = 32);

inline Mesh sphere(double radius = 1.0, std::size_t rings = 24, std::size_t segments = 32) {
  return superellipsoid(radius, radius, radius, 1.0, 1.0, rings, segments);
}

/// Torus around z.
Mesh torus(double major = 1.0, double minor = 0.3, std::size_t rings = 24,
           std::size_t segments = 32);

}  // namespace scenezsl::dataset::shapes
