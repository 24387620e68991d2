#include <doctest.h>

#include "edgepose/spatial_index.hpp"
#include "support.hpp"

using namespace edgepose;

TEST_CASE("empty cloud rejected, single point accepted") {
  CHECK_THROWS_AS(SpatialIndex(PointCloud{}), std::invalid_argument);
  PointCloud one;
  one.push_back(Point3(1, 2, 3));
  const SpatialIndex index(one);
  CHECK(index.size() == 1);
  CHECK(index.radius_neighbors(std::size_t{0}, 1.0).empty());
  CHECK(index.radius_neighbors(Point3(1, 2, 3), 0.1) == std::vector<std::size_t>{0});
}

TEST_CASE("collinear points: index 5 at r 0.025") {
  const PointCloud c = test::line_points(11, 0.01);
  const SpatialIndex index(c);
  CHECK(index.radius_neighbors(std::size_t{5}, 0.025) == std::vector<std::size_t>{3, 4, 6, 7});
  CHECK(index.count_neighbors(5, 0.025) == 4);
  CHECK(index.radius_neighbors(std::size_t{5}, 0.005).empty());
}

TEST_CASE("free query equal to a cloud point returns it") {
  const PointCloud c = test::line_points(11, 0.01);
  const SpatialIndex index(c);
  const auto got = index.radius_neighbors(c[5], 0.015);
  CHECK(got == std::vector<std::size_t>{4, 5, 6});
}

TEST_CASE("radius boundary is closed") {
  PointCloud c;
  c.push_back(Point3(0, 0, 0));
  c.push_back(Point3(0.5, 0, 0));
  const SpatialIndex index(c);
  CHECK(index.radius_neighbors(std::size_t{0}, 0.5) == std::vector<std::size_t>{1});
}

TEST_CASE("non-positive radius rejected") {
  const PointCloud c = test::line_points(3, 0.01);
  const SpatialIndex index(c);
  CHECK_THROWS_AS(index.radius_neighbors(std::size_t{0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(index.radius_neighbors(Point3::Zero(), -1.0), std::invalid_argument);
}

TEST_CASE("10k points match brute force") {
  Rng rng(3);
  const PointCloud c = test::random_cloud(rng, 10000, 0.5);
  const SpatialIndex index(c);
  for (int q = 0; q < 50; ++q) {
    const std::size_t i = rng.below(c.size());
    const double r = rng.uniform(0.01, 0.1);
    CHECK(index.radius_neighbors(i, r) == test::brute_radius(c, c[i], r, i));
    const Point3 p(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6));
    CHECK(index.radius_neighbors(p, r) == test::brute_radius(c, p, r));
  }
}

TEST_CASE("duplicates and degenerate layouts") {
  PointCloud c;
  for (int i = 0; i < 40; ++i) c.push_back(Point3(0.1, 0.1, 0.1));
  for (int i = 0; i < 40; ++i) c.push_back(Point3(0.1, 0.1, 0.1 + 0.001 * i));
  const SpatialIndex index(c);
  for (std::size_t i = 0; i < c.size(); i += 7) {
    CHECK(index.radius_neighbors(i, 0.0105) == test::brute_radius(c, c[i], 0.0105, i));
  }
}

TEST_CASE("nearest: sorted by distance, ties by index") {
  const PointCloud c = test::line_points(11, 0.25);  // exact binary spacing, exact ties
  const SpatialIndex index(c);
  CHECK(index.nearest(c[5], 3) == std::vector<std::size_t>{5, 4, 6});
  CHECK(index.nearest(Point3(-1, 0, 0), 2) == std::vector<std::size_t>{0, 1});
  CHECK(index.nearest(c[0], 50).size() == 11);

  Rng rng(9);
  const PointCloud r = test::random_cloud(rng, 2000, 1.0);
  const SpatialIndex ri(r);
  const Point3 q(0.1, -0.2, 0.3);
  std::vector<std::size_t> all(r.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::sort(all.begin(), all.end(), [&](std::size_t a, std::size_t b) {
    const double da = (r[a] - q).squaredNorm(), db = (r[b] - q).squaredNorm();
    return da < db || (da == db && a < b);
  });
  all.resize(10);
  CHECK(ri.nearest(q, 10) == all);
}
