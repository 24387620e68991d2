#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "edgepose/point_cloud.hpp"

namespace edgepose {

/// Infinite line through `point` along unit `direction`.
struct LineModel {
  Point3 point = Point3::Zero();
  Vector3 direction = Vector3::UnitX();

  double distance(const Point3& p) const {
    return (p - point).cross(direction).norm();
  }
  double project(const Point3& p) const { return (p - point).dot(direction); }
};

struct ExtractParams {
  double distance_threshold = 0.01;  // RANSAC inlier distance, meters
  std::size_t max_iterations = 1000;
  std::size_t min_inliers = 30;
  /// Lower the inlier floor to max(10, 1% of |E|) for small edge clouds.
  bool scale_min_inliers = true;
  std::size_t max_segments = 64;
  double radius = 0.02;  // neighbor radius for reference and extreme search

  void validate() const;
  std::size_t effective_min_inliers(std::size_t edge_count) const;
};

struct RansacLine {
  LineModel model;
  std::vector<std::size_t> inliers;  // ascending indices into the input
};

/// Best-consensus two-point line. Throws std::invalid_argument for fewer than
/// two points; returns nullopt when the best consensus is below
/// `params.min_inliers`.
std::optional<RansacLine> ransac_line(std::span<const Point3> points,
                                      const ExtractParams& params, std::uint64_t seed);

/// Index of the point with the most other points within `radius`; ties go to
/// the lowest index. Requires a nonempty input.
std::size_t reference_index(std::span<const Point3> inliers, double radius);

struct Extremes {
  std::size_t first;   // nearest qualifying candidate to the reference
  std::size_t second;  // nearest qualifying candidate on the opposite side
  bool one_sided = false;  // no opposite candidate; `second` is the reference
};

/// Extreme-point search around `reference`. A point qualifies when none of its
/// neighbors within `radius` lies against the direction toward the reference.
/// Returns nullopt when no point qualifies.
std::optional<Extremes> extreme_points(std::span<const Point3> inliers,
                                       std::size_t reference, double radius);

struct LineSegment {
  Point3 e1 = Point3::Zero();
  Point3 e2 = Point3::Zero();
  std::vector<std::size_t> members;  // indices into the edge cloud
  bool one_sided = false;

  double length() const { return (e2 - e1).norm(); }
  Vector3 direction() const { return (e2 - e1).normalized(); }
  LineModel line() const { return {e1, direction()}; }
};

/// Repeats RANSAC, reference search, and extreme search on the edge cloud,
/// removing each segment's members, until no line reaches the inlier floor.
std::vector<LineSegment> extract_all_segments(const PointCloud& edges,
                                              const ExtractParams& params,
                                              std::uint64_t seed);

}  // namespace edgepose
