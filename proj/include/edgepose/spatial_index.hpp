#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edgepose/point_cloud.hpp"

namespace edgepose {

/// Balanced k-d tree over the points of a cloud, answering closed-ball radius
/// queries and k-nearest queries. The cloud must outlive the index.
///
/// Construction splits at the median along axis depth % 3, so a given cloud
/// always produces the same tree.
class SpatialIndex {
 public:
  /// Throws std::invalid_argument on an empty cloud.
  explicit SpatialIndex(const PointCloud& cloud);

  /// Indices of all points with distance <= radius from `query`, ascending.
  std::vector<std::size_t> radius_neighbors(const Point3& query, double radius) const;

  /// As above for cloud point `index`, never returning `index` itself.
  std::vector<std::size_t> radius_neighbors(std::size_t index, double radius) const;

  /// Neighbor count of cloud point `index` (self excluded) without materializing indices.
  std::size_t count_neighbors(std::size_t index, double radius) const;

  /// The k points closest to `query`, nearest first; ties by lower index.
  std::vector<std::size_t> nearest(const Point3& query, std::size_t k) const;

  std::size_t size() const { return order_.size(); }
  const PointCloud& cloud() const { return *cloud_; }

 private:
  struct Node {
    std::uint32_t begin;  // range into order_
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, unsigned depth);

  template <typename Visit>
  void visit_ball(const Point3& q, double radius, Visit&& visit) const;

  const PointCloud* cloud_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace edgepose
