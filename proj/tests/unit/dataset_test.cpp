#include <gtest/gtest.h>

#include <cmath>

#include "scenezsl/dataset/mesh.hpp"
#include "scenezsl/dataset/point_cloud.hpp"
#include "scenezsl/dataset/shapes.hpp"
#include "scenezsl/dataset/split.hpp"
#include "test_support.hpp"

#ifndef SCENEZSL_FIXTURE_DIR
#error "SCENEZSL_FIXTURE_DIR must be defined"
#endif

namespace scenezsl::dataset {
namespace {

using testing::random_cloud;

constexpr const char* kUnitCube =
    "OFF\n"
    "# unit cube, quad faces\n"
    "8 6 12\n"
    "0 0 0\n1 0 0\n1 1 0\n0 1 0\n"
    "0 0 1\n1 0 1\n1 1 1\n0 1 1\n"
    "4 0 3 2 1\n4 4 5 6 7\n4 0 1 5 4\n4 2 3 7 6\n4 1 2 6 5\n4 0 4 7 3\n";

OffErrc parse_error(std::string_view text, std::size_t* line = nullptr) {
  try {
    parse_off(text);
  } catch (const OffParseError& e) {
    if (line) *line = e.line();
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return OffErrc::kEmptyMesh;
}

TEST(ParseOff, MinimalDocument) {
  const Mesh m = parse_off("OFF\n1 0 0\n0 0 0\n");
  EXPECT_EQ(m.vertices.size(), 1u);
  EXPECT_TRUE(m.faces.empty());
}

TEST(ParseOff, QuadsAreFanTriangulated) {
  const Mesh m = parse_off(kUnitCube);
  EXPECT_EQ(m.vertices.size(), 8u);
  ASSERT_EQ(m.faces.size(), 12u);
  EXPECT_EQ(m.faces[0], (Triangle{0, 3, 2}));
  EXPECT_EQ(m.faces[1], (Triangle{0, 2, 1}));
  double area = 0.0;
  for (const auto& f : m.faces) area += triangle_area(m, f);
  EXPECT_NEAR(area, 6.0, 1e-12);
}

TEST(ParseOff, CountsOnHeaderLine) {
  EXPECT_EQ(parse_off("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").faces.size(), 1u);
  EXPECT_EQ(parse_off("OFF3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").faces.size(), 1u);
}

TEST(ParseOff, IgnoresColorTokensAndBlankLines) {
  const Mesh m = parse_off("OFF\n\n3 1 0\n0 0 0\n1 0 0\n\n0 1 0\n3 0 1 2 255 0 0\n");
  EXPECT_EQ(m.faces.size(), 1u);
}

TEST(ParseOff, Errors) {
  std::size_t line = 0;
  EXPECT_EQ(parse_error("OFF\n2 1 0\n0 0 0\n", &line), OffErrc::kCountMismatch);
  EXPECT_EQ(line, 2u);
  EXPECT_EQ(parse_error("PLY\n1 0 0\n0 0 0\n"), OffErrc::kMissingHeader);
  EXPECT_EQ(parse_error("OFF\n1 0 0\n0 x 0\n", &line), OffErrc::kNonNumericToken);
  EXPECT_EQ(line, 3u);
  EXPECT_EQ(parse_error("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n", &line), OffErrc::kIndexOutOfRange);
  EXPECT_EQ(line, 6u);
  EXPECT_EQ(parse_error("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 1\n"), OffErrc::kDegenerateFace);
  EXPECT_EQ(parse_error("OFF\n0 0 0\n"), OffErrc::kEmptyMesh);
}

TEST(ParseOff, RoundTrip) {
  const std::vector<Mesh> corpus{parse_off(kUnitCube), shapes::box(0.3, 1.7, 2.0), shapes::cylinder(0.7, 1.1, 9),
                                 shapes::cone(1.0, 0.5, 12), shapes::superellipsoid(1.0, 0.6, 1.3, 0.3, 1.7, 7, 11),
                                 shapes::torus(1.0, 0.25, 9, 13)};
  for (const auto& m : corpus) {
    const Mesh again = parse_off(write_off(m));
    EXPECT_EQ(again, m);
    EXPECT_EQ(write_off(again), write_off(m));
  }
}

TEST(Shapes, ClosedSurfaceAreas) {
  const auto area = [](const Mesh& m) {
    double a = 0.0;
    for (const auto& f : m.faces) a += triangle_area(m, f);
    return a;
  };
  EXPECT_NEAR(area(shapes::box(1, 2, 3)), 8.0 * (1 * 2 + 2 * 3 + 1 * 3), 1e-9);
  EXPECT_NEAR(area(shapes::sphere(1.0, 64, 128)), 4.0 * std::numbers::pi, 0.01);
  EXPECT_NEAR(area(shapes::cylinder(1.0, 1.0, 256)), 6.0 * std::numbers::pi, 0.01);
}

Mesh unit_square() { return parse_off("OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n"); }

TEST(SamplePoints, StaysOnSurface) {
  const PointCloud c = sample_points(unit_square(), 1000, 5);
  ASSERT_EQ(c.size(), 1000u);
  for (const auto& p : c.points) {
    EXPECT_EQ(std::abs(p[2]), 0.0);
    EXPECT_GE(p[0], 0.0);
    EXPECT_LE(p[0], 1.0);
    EXPECT_GE(p[1], 0.0);
    EXPECT_LE(p[1], 1.0);
  }
}

TEST(SamplePoints, Deterministic) {
  const Mesh m = shapes::torus();
  EXPECT_EQ(sample_points(m, 512, 99), sample_points(m, 512, 99));
  EXPECT_NE(sample_points(m, 512, 99), sample_points(m, 512, 100));
}

TEST(SamplePoints, AreaWeighted) {
  // Large triangle (area 9) at x <= 0, small one (area 1) at x >= 10.
  const Mesh m = parse_off(
      "OFF\n6 2 0\n-6 0 0\n0 0 0\n0 3 0\n10 0 0\n12 0 0\n10 1 0\n3 0 1 2\n3 3 4 5\n");
  const PointCloud c = sample_points(m, 10000, 1234);
  std::size_t large = 0;
  for (const auto& p : c.points) large += p[0] <= 0.0 ? 1 : 0;
  const double fraction = static_cast<double>(large) / 10000.0;
  EXPECT_GE(fraction, 0.88);
  EXPECT_LE(fraction, 0.92);
}

TEST(SamplePoints, ZeroAreaIsAnError) {
  const Mesh m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n2 0 0\n3 0 1 2\n");
  try {
    sample_points(m, 10, 0);
    FAIL();
  } catch (const CloudError& e) {
    EXPECT_EQ(e.code(), CloudErrc::kZeroTotalArea);
  }
}

TEST(Normalize, TwoPointSymmetry) {
  PointCloud c;
  c.points = {{0, 0, 0}, {2, 0, 0}};
  const PointCloud n = normalize_unit_sphere(c);
  EXPECT_EQ(n.points[0], (Vec3{-1, 0, 0}));
  EXPECT_EQ(n.points[1], (Vec3{1, 0, 0}));
}

TEST(Normalize, BoundsAndIdempotence) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PointCloud c = random_cloud(100, seed);
    for (auto& p : c.points) p = {3.0 * p[0] + 5.0, 0.5 * p[1] - 2.0, p[2] + 7.0};
    const PointCloud n = normalize_unit_sphere(c);
    const Vec3 g = centroid(n.points);
    EXPECT_LT(std::hypot(g[0], g[1], g[2]), 1e-6);
    const double r = max_norm(n.points);
    EXPECT_GE(r, 1.0 - 1e-6);
    EXPECT_LE(r, 1.0);
    const PointCloud twice = normalize_unit_sphere(n);
    for (std::size_t i = 0; i < n.size(); ++i) {
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(twice.points[i][k], n.points[i][k], 1e-6);
    }
  }
}

TEST(Normalize, DegenerateCloud) {
  PointCloud c;
  c.points = {{1, 1, 1}, {1, 1, 1}};
  EXPECT_THROW(normalize_unit_sphere(c), CloudError);
}

TEST(Pcb1, RoundTripThroughFloat) {
  PointCloud c = random_cloud(33, 4);
  const std::string bytes = encode_pcb1(c);
  EXPECT_EQ(bytes.size(), 8u + 33u * 12u);
  EXPECT_EQ(bytes.substr(0, 4), "PCB1");
  const PointCloud back = decode_pcb1(bytes);
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int k = 0; k < 3; ++k) EXPECT_EQ(back.points[i][k], static_cast<double>(static_cast<float>(c.points[i][k])));
  }
  EXPECT_EQ(encode_pcb1(back), bytes);
}

TEST(Pcb1, RejectsTruncated) {
  const std::string bytes = encode_pcb1(random_cloud(4, 1));
  EXPECT_THROW(decode_pcb1(bytes.substr(0, bytes.size() - 1)), CloudError);
  EXPECT_THROW(decode_pcb1("PCB2" + bytes.substr(4)), CloudError);
}

TEST(Split, ModelNetFixture) {
  const auto split = load_split(std::filesystem::path(SCENEZSL_FIXTURE_DIR) / "modelnet40_10.split");
  EXPECT_EQ(split.seen_classes.size(), 30u);
  EXPECT_EQ(split.unseen_classes.size(), 10u);
  EXPECT_EQ(split.train_items.size(), 5852u);
  EXPECT_EQ(split.valid_items.size(), 1560u);
  EXPECT_EQ(split.test_items.size(), 908u);
  for (const auto& c : split.seen_classes) EXPECT_FALSE(split.is_unseen(c));
  EXPECT_TRUE(split.is_unseen("night_stand"));
  EXPECT_EQ(split.resolve(split.test_items[0]).parent_path().parent_path().parent_path(),
            std::filesystem::path(SCENEZSL_FIXTURE_DIR));
}

TEST(Split, ScanObjectNnFixture) {
  const auto split = load_split(std::filesystem::path(SCENEZSL_FIXTURE_DIR) / "scanobjectnn.split");
  EXPECT_EQ(split.seen_classes.size(), 26u);
  EXPECT_EQ(split.unseen_classes,
            (std::vector<std::string>{"cabinet", "chair", "desk", "display", "door", "shelf", "table", "bed", "sink",
                                      "sofa", "toilet"}));
  EXPECT_EQ(split.test_items.size(), 495u);
}

SplitErrc split_error(std::string_view text) {
  try {
    parse_split(text);
  } catch (const SplitError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return SplitErrc::kIo;
}

TEST(Split, Errors) {
  EXPECT_EQ(split_error("[seen]\nchair\n[unseen]\nchair\n"), SplitErrc::kOverlappingClasses);
  EXPECT_EQ(split_error("[seen]\nchair\n[train]\na.pcb lamp\n"), SplitErrc::kUnknownClassInItem);
  EXPECT_EQ(split_error("[unseen]\nchair\n"), SplitErrc::kEmptySeenSet);
  EXPECT_EQ(split_error("[seen]\nchair\n[train]\nonly_a_path\n"), SplitErrc::kMalformedLine);
  EXPECT_EQ(split_error("chair\n"), SplitErrc::kMalformedLine);
}

TEST(Split, FormatRoundTrip) {
  const auto split = parse_split("[seen]\nchair # comment\nlamp\n[unseen]\nbed\n[train]\nc/1.pcb chair\n[test]\nb/1.pcb bed\n");
  EXPECT_EQ(split.seen_index("lamp"), 1u);
  EXPECT_EQ(split.unseen_index("bed"), 0u);
  EXPECT_EQ(parse_split(format_split(split)), split);
}

}  // namespace
}  // namespace scenezsl::dataset
