#pragma once

#include <algorithm>
#include <vector>

#include "edgepose/point_cloud.hpp"
#include "edgepose/random.hpp"

namespace edgepose::test {

inline PointCloud random_cloud(Rng& rng, std::size_t n, double extent) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.push_back(Point3(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                       rng.uniform(-extent, extent)));
  }
  return c;
}

inline std::vector<std::size_t> brute_radius(const PointCloud& c, const Point3& q, double r,
                                             std::size_t skip = SIZE_MAX) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i != skip && (c[i] - q).norm() <= r) out.push_back(i);
  }
  return out;
}

inline PointCloud line_points(std::size_t n, double spacing,
                              const Point3& origin = Point3::Zero(),
                              const Vector3& dir = Vector3::UnitX()) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.push_back(origin + dir * (spacing * double(i)));
  return c;
}

}  // namespace edgepose::test
