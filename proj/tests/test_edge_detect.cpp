#include <doctest.h>

#include <cmath>
#include <numbers>

#include "edgepose/edge_detect.hpp"
#include "edgepose/scene_gen.hpp"
#include "edgepose/spatial_index.hpp"
#include "support.hpp"

using namespace edgepose;

namespace {

// Query at the origin plus n uniform samples of a disk sector of radius r.
PointCloud sector(Rng& rng, std::size_t n, double r, double max_angle) {
  PointCloud c;
  c.push_back(Point3::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = r * std::sqrt(rng.uniform());
    const double phi = max_angle * rng.uniform();
    c.push_back(Point3(rho * std::cos(phi), rho * std::sin(phi), 0.0));
  }
  return c;
}

double brute_score(const PointCloud& c, std::size_t i, double r, std::size_t kmin) {
  Vector3 res = Vector3::Zero();
  std::vector<Vector3> dirs;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j == i || (c[j] - c[i]).norm() > r) continue;
    dirs.push_back((c[j] - c[i]).normalized());
    res += dirs.back();
  }
  if (dirs.size() < kmin || res.norm() < kResultantEpsilon) return 0.0;
  return res.norm() / double(dirs.size());
}

}  // namespace

TEST_CASE("opposite neighbors cancel") {
  PointCloud c;
  c.push_back(Point3::Zero());
  c.push_back(Point3(0.01, 0, 0));
  c.push_back(Point3(-0.01, 0, 0));
  const SpatialIndex index(c);
  CHECK(point_score(index, 0, 0.02, 1).score == 0.0);
}

TEST_CASE("single neighbor scores 1 without the neighbor floor, 0 with it") {
  PointCloud c;
  c.push_back(Point3::Zero());
  c.push_back(Point3(0.01, 0.002, 0));
  const SpatialIndex index(c);
  CHECK(point_score(index, 0, 0.02, 1).score == doctest::Approx(1.0));
  CHECK(point_score(index, 0, 0.02).score == 0.0);
}

TEST_CASE("score equals |R|/k on random neighborhoods") {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const PointCloud c = test::random_cloud(rng, 3 + rng.below(40), 0.02);
    const SpatialIndex index(c);
    const std::size_t i = rng.below(c.size());
    CHECK(point_score(index, i, 0.03).score == doctest::Approx(brute_score(c, i, 0.03, 3)).epsilon(1e-9));
  }
}

TEST_CASE("half-disk and quarter-disk analytic limits") {
  Rng rng(8);
  const double r = 0.02;
  const PointCloud half = sector(rng, 100000, r * 0.999, std::numbers::pi);
  const PointCloud quarter = sector(rng, 100000, r * 0.999, std::numbers::pi / 2);
  CHECK(std::abs(point_score(SpatialIndex(half), 0, r).score - 2.0 / std::numbers::pi) < 0.01);
  CHECK(std::abs(point_score(SpatialIndex(quarter), 0, r).score -
                 2.0 * std::numbers::sqrt2 / std::numbers::pi) < 0.01);
}

TEST_CASE("one-point cloud has no edges; empty cloud gives empty result") {
  PointCloud one;
  one.push_back(Point3::Zero());
  CHECK(extract_edge_points(one, {}).edges.empty());
  CHECK(extract_edge_points(PointCloud{}, {}).edges.empty());
}

TEST_CASE("noiseless 0.2 m grid: edge set is the brute-force band along the border") {
  const PlanarPatch patch = sample_planar_patch(0.2, 0.2, 0.002, 0.0, 1);
  const EdgeParams params;
  const EdgeExtraction ex = extract_edge_points(patch.cloud, params);
  std::size_t edges = 0;
  for (std::size_t i = 0; i < patch.cloud.size(); i += 13) {
    const bool want = brute_score(patch.cloud, i, params.radius, 3) > params.threshold;
    CHECK(ex.scored.is_edge[i] == want);
  }
  for (std::size_t i = 0; i < patch.cloud.size(); ++i) {
    if (!ex.scored.is_edge[i]) continue;
    ++edges;
    const Point3& p = patch.cloud[i];
    // Every edge lies in the border band, none in the interior.
    CHECK(std::max(std::abs(p.x()), std::abs(p.y())) > 0.1 - params.radius);
  }
  for (std::size_t i = 0; i < patch.cloud.size(); ++i) {
    if (patch.boundary[i]) CHECK(ex.scored.is_edge[i]);
  }
  CHECK(edges > 0);
}

TEST_CASE("noisy plane: interior false positives below 5%") {
  const PlanarPatch patch = sample_planar_patch(std::sqrt(0.2), std::sqrt(0.2), 0.002, 0.001, 4);
  const EdgeExtraction ex = extract_edge_points(patch.cloud, {});
  std::size_t interior = 0, fp = 0, boundary = 0, hit = 0;
  for (std::size_t i = 0; i < patch.cloud.size(); ++i) {
    if (patch.boundary[i]) {
      ++boundary;
      hit += ex.scored.is_edge[i];
    } else {
      ++interior;
      fp += ex.scored.is_edge[i];
    }
  }
  CHECK(double(fp) / interior < 0.05);
  CHECK(double(hit) / boundary >= 0.9);
}

TEST_CASE("covariance baseline") {
  SUBCASE("exact plane scores 0") {
    const PlanarPatch patch = sample_planar_patch(0.05, 0.05, 0.002, 0.0, 1);
    const SpatialIndex index(patch.cloud);
    for (double v : covariance_edge_baseline(index, 10)) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("exact line scores 0") {
    const PointCloud c = test::line_points(30, 0.01);
    const SpatialIndex index(c);
    for (double v : covariance_edge_baseline(index, 5)) CHECK(std::abs(v) < 1e-12);
  }
  SUBCASE("noise raises the mean above the exact-plane value") {
    const PlanarPatch flat = sample_planar_patch(0.1, 0.1, 0.002, 0.0, 2);
    const PlanarPatch noisy = sample_planar_patch(0.1, 0.1, 0.002, 0.002, 2);
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / double(v.size());
    };
    CHECK(mean(covariance_edge_baseline(SpatialIndex(noisy.cloud), 10)) >
          mean(covariance_edge_baseline(SpatialIndex(flat.cloud), 10)));
  }
  SUBCASE("bad k") {
    const PointCloud c = test::line_points(5, 0.01);
    const SpatialIndex index(c);
    CHECK_THROWS_AS(covariance_edge_baseline(index, 2), std::invalid_argument);
    CHECK_THROWS_AS(covariance_edge_baseline(index, 6), std::invalid_argument);
  }
}

TEST_CASE("parameter validation") {
  EdgeParams p;
  p.radius = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.radius = 0.02;
  p.threshold = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
