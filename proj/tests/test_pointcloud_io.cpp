#include <doctest.h>

#include <sstream>
#include <string>

#include "edgepose/pointcloud_io.hpp"
#include "support.hpp"

using namespace edgepose;

namespace {

std::string pcd_header(std::size_t width, std::size_t points) {
  return "# .PCD v0.7\nVERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n"
         "WIDTH " + std::to_string(width) + "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS " +
         std::to_string(points) + "\nDATA ascii\n";
}

}  // namespace

TEST_CASE("pcd: three points in file order") {
  const auto r = read_pcd(pcd_header(3, 3) + "0 0 0\n1 0 0\n0 1 0\n");
  REQUIRE(r.cloud.size() == 3);
  CHECK(r.cloud[0] == Point3(0, 0, 0));
  CHECK(r.cloud[1] == Point3(1, 0, 0));
  CHECK(r.cloud[2] == Point3(0, 1, 0));
  CHECK(r.dropped_non_finite == 0);
}

TEST_CASE("pcd: nan row dropped and counted") {
  std::string body;
  for (int i = 0; i < 10; ++i) body += i == 4 ? "nan nan nan\n" : std::to_string(i) + " 0 0\n";
  const auto r = read_pcd(pcd_header(10, 10) + body);
  CHECK(r.cloud.size() == 9);
  CHECK(r.dropped_non_finite == 1);
}

TEST_CASE("pcd: row count disagreeing with WIDTH is a parse error") {
  CHECK_THROWS_AS(read_pcd(pcd_header(5, 5) + "0 0 0\n1 0 0\n2 0 0\n3 0 0\n"), ParseError);
}

TEST_CASE("pcd: binary data rejected, extra fields ignored") {
  CHECK_THROWS_AS(read_pcd("VERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n"
                           "WIDTH 1\nHEIGHT 1\nPOINTS 1\nDATA binary\n"),
                  ParseError);
  const auto r = read_pcd(
      "VERSION 0.7\nFIELDS x y z rgb\nSIZE 4 4 4 4\nTYPE F F F F\nCOUNT 1 1 1 1\nWIDTH 1\n"
      "HEIGHT 1\nPOINTS 1\nDATA ascii\n1 2 3 4.2e6\n");
  REQUIRE(r.cloud.size() == 1);
  CHECK(r.cloud[0] == Point3(1, 2, 3));
}

TEST_CASE("ply: minimal vertex") {
  const auto r = read_ply(
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
      "property float z\nend_header\n0.5 -1 2\n");
  REQUIRE(r.cloud.size() == 1);
  CHECK(r.cloud[0] == Point3(0.5, -1, 2));
}

TEST_CASE("ply: extra vertex properties ignored") {
  const auto r = read_ply(
      "ply\nformat ascii 1.0\nelement vertex 2\nproperty float nx\nproperty float x\n"
      "property float y\nproperty float ny\nproperty float z\nproperty float nz\nend_header\n"
      "9 1 2 9 3 9\n9 4 5 9 6 9\n");
  REQUIRE(r.cloud.size() == 2);
  CHECK(r.cloud[0] == Point3(1, 2, 3));
  CHECK(r.cloud[1] == Point3(4, 5, 6));
}

TEST_CASE("ply: binary encoding rejected") {
  CHECK_THROWS_AS(read_ply("ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
                           "property float x\nproperty float y\nproperty float z\nend_header\n"),
                  ParseError);
}

TEST_CASE("ply: other elements skipped, truncated data rejected") {
  const std::string head =
      "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
      "property float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n";
  const auto r = read_ply(head + "0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  CHECK(r.cloud.size() == 3);
  CHECK_THROWS_AS(read_ply(head + "0 0 0\n1 0 0\n"), ParseError);
}

TEST_CASE("annotated ply: labels become distinct colors") {
  PointCloud c;
  c.push_back(Point3(0, 0, 0));
  c.push_back(Point3(1, 0, 0));
  const std::vector<PointLabel> labels{PointLabel::kEdge, PointLabel::kNonEdge};
  std::ostringstream out;
  write_annotated(out, c, labels);
  const std::string text = out.str();
  CHECK(text.find("element vertex 2") != std::string::npos);
  CHECK(text.find("property uchar red") != std::string::npos);
  CHECK(read_ply(text).cloud.size() == 2);
  CHECK(!(label_color(PointLabel::kEdge) == label_color(PointLabel::kNonEdge)));
  CHECK_THROWS_AS(write_annotated(out, c, std::vector<PointLabel>{PointLabel::kEdge}),
                  std::invalid_argument);
}

TEST_CASE("empty cloud writes a valid zero-vertex file") {
  std::ostringstream ply, pcd;
  write_ply(ply, PointCloud{});
  write_pcd(pcd, PointCloud{});
  CHECK(read_ply(ply.str()).cloud.empty());
  CHECK(read_pcd(pcd.str()).cloud.empty());
}

TEST_CASE("round trip of 1000 random points within 1e-6") {
  Rng rng(11);
  const PointCloud c = test::random_cloud(rng, 1000, 2.0);
  for (int fmt = 0; fmt < 2; ++fmt) {
    std::ostringstream out;
    fmt ? write_pcd(out, c) : write_ply(out, c);
    const PointCloud back = fmt ? read_pcd(out.str()).cloud : read_ply(out.str()).cloud;
    REQUIRE(back.size() == c.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      worst = std::max(worst, (back[i] - c[i]).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("fuzz: random bytes never crash the readers") {
  Rng rng(5);
  const std::string seeds[] = {pcd_header(2, 2) + "0 0 0\n1 1 1\n",
                               "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n"
                               "property float y\nproperty float z\nend_header\n1 2 3\n"};
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    if (i % 2) {
      s.resize(rng.below(200));
      for (char& ch : s) ch = static_cast<char>(rng.below(256));
    } else {
      s = seeds[rng.below(2)];
      const auto flips = 1 + rng.below(4);
      for (std::uint64_t f = 0; f < flips; ++f) s[rng.below(s.size())] = static_cast<char>(rng.below(256));
    }
    try {
      (void)read_pcd(s);
    } catch (const ParseError&) {
    }
    try {
      (void)read_ply(s);
    } catch (const ParseError&) {
    }
  }
  CHECK(true);
}
