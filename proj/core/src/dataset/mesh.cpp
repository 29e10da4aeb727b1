#include "scenezsl/dataset/mesh.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace scenezsl::dataset {

std::string_view to_string(OffErrc code) noexcept {
  switch (code) {
    case OffErrc::kMissingHeader: return "MissingHeader";
    case OffErrc::kCountMismatch: return "CountMismatch";
    case OffErrc::kNonNumericToken: return "NonNumericToken";
    case OffErrc::kIndexOutOfRange: return "IndexOutOfRange";
    case OffErrc::kDegenerateFace: return "DegenerateFace";
    case OffErrc::kEmptyMesh: return "EmptyMesh";
  }
  return "Unknown";
}

OffParseError::OffParseError(OffErrc code, std::size_t line, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + " at line " + std::to_string(line) +
                         ": " + detail),
      code_(code),
      line_(line) {}

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

// Splits the document into non-empty, non-comment lines of whitespace tokens.
std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    ++number;
    std::string_view raw = text.substr(pos, end - pos);
    if (auto hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      std::size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      if (j > i) line.tokens.push_back(raw.substr(i, j - i));
      i = j;
    }
    if (!line.tokens.empty()) {
      lines.push_back(std::move(line));
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

double parse_real(std::string_view token, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw OffParseError(OffErrc::kNonNumericToken, line,
                        "expected a number, got '" + std::string(token) + "'");
  }
  return value;
}

std::uint64_t parse_count(std::string_view token, std::size_t line) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw OffParseError(OffErrc::kNonNumericToken, line,
                        "expected a non-negative integer, got '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

Mesh parse_off(std::string_view text) {
  // Strip a UTF-8 BOM if present.
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  const std::vector<Line> lines = tokenize(text);
  if (lines.empty() || !lines[0].tokens[0].starts_with("OFF")) {
    throw OffParseError(OffErrc::kMissingHeader, lines.empty() ? 1 : lines[0].number,
                        "document does not start with 'OFF'");
  }

  // Counts may follow the magic on the same line, possibly glued to it.
  std::vector<std::string_view> count_tokens;
  std::size_t counts_line = lines[0].number;
  std::size_t cursor = 1;
  std::string_view rest = lines[0].tokens[0].substr(3);
  if (!rest.empty()) count_tokens.push_back(rest);
  for (std::size_t t = 1; t < lines[0].tokens.size(); ++t) count_tokens.push_back(lines[0].tokens[t]);
  if (count_tokens.empty()) {
    if (lines.size() < 2) {
      throw OffParseError(OffErrc::kCountMismatch, lines[0].number + 1, "missing counts line");
    }
    counts_line = lines[1].number;
    count_tokens = lines[1].tokens;
    cursor = 2;
  }
  if (count_tokens.size() < 2) {
    throw OffParseError(OffErrc::kCountMismatch, counts_line,
                        "counts line needs at least vertex and face counts");
  }
  const std::uint64_t n_vertices = parse_count(count_tokens[0], counts_line);
  const std::uint64_t n_faces = parse_count(count_tokens[1], counts_line);
  if (count_tokens.size() > 2) parse_count(count_tokens[2], counts_line);
  if (n_vertices == 0) {
    throw OffParseError(OffErrc::kEmptyMesh, counts_line, "mesh declares zero vertices");
  }
  if (lines.size() - cursor < n_vertices + n_faces) {
    throw OffParseError(OffErrc::kCountMismatch, counts_line,
                        "declared " + std::to_string(n_vertices) + " vertices and " +
                            std::to_string(n_faces) + " faces, found " +
                            std::to_string(lines.size() - cursor) + " data lines");
  }

  Mesh mesh;
  mesh.vertices.reserve(n_vertices);
  for (std::uint64_t v = 0; v < n_vertices; ++v, ++cursor) {
    const Line& line = lines[cursor];
    if (line.tokens.size() < 3) {
      throw OffParseError(OffErrc::kCountMismatch, line.number, "vertex line needs 3 coordinates");
    }
    mesh.vertices.push_back({parse_real(line.tokens[0], line.number),
                             parse_real(line.tokens[1], line.number),
                             parse_real(line.tokens[2], line.number)});
  }

  mesh.faces.reserve(n_faces);
  std::vector<std::uint32_t> polygon;
  for (std::uint64_t f = 0; f < n_faces; ++f, ++cursor) {
    const Line& line = lines[cursor];
    const std::uint64_t k = parse_count(line.tokens[0], line.number);
    if (line.tokens.size() < k + 1) {
      throw OffParseError(OffErrc::kCountMismatch, line.number,
                          "face declares " + std::to_string(k) + " indices");
    }
    if (k < 3) {
      throw OffParseError(OffErrc::kDegenerateFace, line.number, "face has fewer than 3 vertices");
    }
    polygon.clear();
    for (std::uint64_t i = 0; i < k; ++i) {
      const std::uint64_t index = parse_count(line.tokens[1 + i], line.number);
      if (index >= n_vertices) {
        throw OffParseError(OffErrc::kIndexOutOfRange, line.number,
                            "vertex index " + std::to_string(index) + " >= " +
                                std::to_string(n_vertices));
      }
      for (std::uint32_t seen : polygon) {
        if (seen == index) {
          throw OffParseError(OffErrc::kDegenerateFace, line.number,
                              "face repeats vertex " + std::to_string(index));
        }
      }
      polygon.push_back(static_cast<std::uint32_t>(index));
    }
    for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
      mesh.faces.push_back({polygon[0], polygon[i], polygon[i + 1]});
    }
  }
  return mesh;
}

Mesh read_off(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_off(buffer.str());
}

std::string write_off(const Mesh& mesh) {
  std::string out = "OFF\n";
  out += std::to_string(mesh.vertices.size()) + " " + std::to_string(mesh.faces.size()) + " 0\n";
  char buf[64];
  for (const Vec3& v : mesh.vertices) {
    for (int c = 0; c < 3; ++c) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v[c]);
      out.append(buf, ptr);
      out += c < 2 ? ' ' : '\n';
    }
  }
  for (const Triangle& f : mesh.faces) {
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) +
           "\n";
  }
  return out;
}

double triangle_area(const Mesh& mesh, const Triangle& face) noexcept {
  const Vec3& a = mesh.vertices[face[0]];
  const Vec3& b = mesh.vertices[face[1]];
  const Vec3& c = mesh.vertices[face[2]];
  const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
  const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
  const double cx = uy * vz - uz * vy;
  const double cy = uz * vx - ux * vz;
  const double cz = ux * vy - uy * vx;
  return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

}  // namespace scenezsl::dataset
