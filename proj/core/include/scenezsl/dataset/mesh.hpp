#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scenezsl::dataset {

using Vec3 = std::array<double, 3>;
using Triangle = std::array<std::uint32_t, 3>;

/// Triangulated surface. Every face index is < vertices.size().
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> faces;

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

enum class OffErrc {
  kMissingHeader,
  kCountMismatch,
  kNonNumericToken,
  kIndexOutOfRange,
  kDegenerateFace,
  kEmptyMesh,
};

std::string_view to_string(OffErrc code) noexcept;

class OffParseError : public std::runtime_error {
 public:
  OffParseError(OffErrc code, std::size_t line, const std::string& detail);

  OffErrc code() const noexcept { return code_; }
  /// 1-based line number the error refers to.
  std::size_t line() const noexcept { return line_; }

 private:
  OffErrc code_;
  std::size_t line_;
};

/// Parses an OFF document. Accepts "OFF" alone on the first line or followed
/// by the counts ("OFF 8 6 0" and the ModelNet-style "OFF8 6 0"). Lines
/// starting with '#' and blank lines are skipped. Polygons with more than
/// three vertices are fan-triangulated around their first vertex; trailing
/// tokens on vertex/face lines (colors) are ignored.
Mesh parse_off(std::string_view text);

/// Reads and parses an OFF file from disk.
Mesh read_off(const std::string& path);

/// Serializes to OFF with shortest round-trip number formatting, so that
/// parse_off(write_off(m)) == m.
std::string write_off(const Mesh& mesh);

/// Area of one triangle.
double triangle_area(const Mesh& mesh, const Triangle& face) noexcept;

}  // namespace scenezsl::dataset
