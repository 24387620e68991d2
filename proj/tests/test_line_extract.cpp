#include <doctest.h>

#include "edgepose/edge_detect.hpp"
#include "edgepose/line_extract.hpp"
#include "edgepose/scene_gen.hpp"
#include "support.hpp"

using namespace edgepose;

TEST_CASE("ransac: exact collinear points are all inliers") {
  const PointCloud c = test::line_points(100, 0.01, Point3(0.1, 0.2, 0.3),
                                         Vector3(1, 2, 2).normalized());
  const auto fit = ransac_line(c.points, {}, 1);
  REQUIRE(fit);
  CHECK(fit->inliers.size() == 100);
  CHECK(std::abs(fit->model.direction.dot(Vector3(1, 2, 2).normalized())) > 1.0 - 1e-6);
}

TEST_CASE("ransac: two orthogonal segments plus outliers pick one segment exactly") {
  PointCloud c;
  for (int i = 0; i < 100; ++i) c.push_back(Point3(0.002 * i, 0, 0));
  // Skew to the first so neither line passes through the other's points.
  for (int i = 0; i < 100; ++i) c.push_back(Point3(0.1, 0.05 + 0.002 * i, 0.05));
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    c.push_back(Point3(rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.3), rng.uniform(0.1, 0.3)));
  }
  const auto fit = ransac_line(c.points, {}, 99);
  REQUIRE(fit);
  std::vector<std::size_t> first(100), second(100);
  for (std::size_t i = 0; i < 100; ++i) {
    first[i] = i;
    second[i] = 100 + i;
  }
  CHECK((fit->inliers == first || fit->inliers == second));
}

TEST_CASE("ransac: fewer than two points rejected, weak consensus is nullopt") {
  const PointCloud one = test::line_points(1, 0.01);
  CHECK_THROWS_AS(ransac_line(one.points, {}, 0), std::invalid_argument);
  const PointCloud few = test::line_points(5, 0.01);
  CHECK_FALSE(ransac_line(few.points, {}, 0));
}

TEST_CASE("reference index") {
  const PointCloud c = test::line_points(11, 0.01);
  CHECK(reference_index(c.points, 0.025) == 2);
  const PointCloud two = test::line_points(2, 0.01);
  CHECK(reference_index(two.points, 0.025) == 0);

  PointCloud cluster;
  cluster.push_back(Point3(1, 0, 0));
  cluster.push_back(Point3(0, 0, 0));
  cluster.push_back(Point3(0.01, 0, 0));
  cluster.push_back(Point3(-0.01, 0, 0));
  cluster.push_back(Point3(0, 0.01, 0));
  CHECK(reference_index(cluster.points, 0.012) == 1);
}

TEST_CASE("extreme points on a collinear run") {
  const PointCloud c = test::line_points(11, 0.01);
  const auto ext = extreme_points(c.points, 2, 0.025);
  REQUIRE(ext);
  CHECK(ext->first == 0);
  CHECK(ext->second == 10);
  CHECK_FALSE(ext->one_sided);
}

TEST_CASE("extremes bound only the run holding the reference") {
  // Two collinear runs with a 5 cm gap, wider than the radius.
  PointCloud c = test::line_points(21, 0.005);
  for (int i = 0; i < 11; ++i) c.push_back(Point3(0.15 + 0.005 * i, 0, 0));
  const std::size_t r = reference_index(c.points, 0.02);
  CHECK(r < 21);
  const auto ext = extreme_points(c.points, r, 0.02);
  REQUIRE(ext);
  CHECK(std::min(ext->first, ext->second) == 0);
  CHECK(std::max(ext->first, ext->second) == 20);
}

TEST_CASE("one-sided run keeps the reference as the second end") {
  // Reference at a physical end: no candidate lies beyond it.
  const PointCloud c = test::line_points(11, 0.01);
  const auto ext = extreme_points(c.points, 0, 0.025);
  REQUIRE(ext);
  CHECK(ext->first == 10);
  CHECK(ext->second == 0);
  CHECK(ext->one_sided);
}

TEST_CASE("interior points never qualify as extremes") {
  const PointCloud c = test::line_points(41, 0.005);
  for (std::size_t r = 3; r < 38; r += 5) {
    const auto ext = extreme_points(c.points, r, 0.02);
    REQUIRE(ext);
    CHECK((ext->first == 0 || ext->first == 40));
    CHECK((ext->second == 0 || ext->second == 40));
  }
}

TEST_CASE("extract_all_segments: empty and top-face cases") {
  CHECK(extract_all_segments(PointCloud{}, {}, 1).empty());

  // Noisy top face only, seen straight on.
  const CuboidDims dims{0.2, 0.1, 0.05};
  Pose pose;
  pose.rotation = Eigen::AngleAxisd(M_PI, Vector3::UnitX()).toRotationMatrix();
  pose.translation = Vector3(0, 0, 0.7);
  const SurfaceSample s = sample_cuboid_surface(dims, pose, 0.002, 0.001, Point3::Zero(), 3);
  const EdgeExtraction ex = extract_edge_points(s.cloud, {});
  const auto segs = extract_all_segments(ex.edges, {}, 5);
  REQUIRE(segs.size() == 4);
  std::vector<double> lens;
  for (const auto& sg : segs) lens.push_back(sg.length());
  std::sort(lens.begin(), lens.end());
  CHECK(std::abs(lens[0] - 0.1) < 0.01);
  CHECK(std::abs(lens[1] - 0.1) < 0.01);
  CHECK(std::abs(lens[2] - 0.2) < 0.01);
  CHECK(std::abs(lens[3] - 0.2) < 0.01);

  std::vector<int> owner(ex.edges.size(), -1);
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const LineModel line = segs[k].line();
    for (std::size_t m : segs[k].members) {
      CHECK(owner[m] == -1);  // members are disjoint
      owner[m] = int(k);
      CHECK(line.distance(ex.edges[m]) <= 0.01 + 1e-12);
    }
  }
}

TEST_CASE("extract_all_segments is deterministic for a seed") {
  const PointCloud a = test::line_points(60, 0.002);
  const PointCloud b = test::line_points(60, 0.002, Point3(0, 0.05, 0), Vector3::UnitY());
  PointCloud c = a;
  for (const auto& p : b.points) c.push_back(p);
  const auto s1 = extract_all_segments(c, {}, 42);
  const auto s2 = extract_all_segments(c, {}, 42);
  REQUIRE(s1.size() == s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1[i].e1 == s2[i].e1);
    CHECK(s1[i].e2 == s2[i].e2);
    CHECK(s1[i].members == s2[i].members);
  }
  CHECK(s1.size() == 2);
}
