#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace edgepose {

/// Camera-frame sample in meters.
using Point3 = Eigen::Vector3d;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

struct Color {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Color&, const Color&) = default;
};

/// Ordered list of points. Indices stay valid for the lifetime of the cloud;
/// colors, when present, run parallel to `points`.
struct PointCloud {
  std::vector<Point3> points;
  std::optional<std::vector<Color>> colors;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Point3& operator[](std::size_t i) const { return points[i]; }

  void push_back(const Point3& p) { points.push_back(p); }
};

/// Axis-aligned box used to crop ground planes out of real scans.
struct CropBox {
  Point3 min;
  Point3 max;

  bool contains(const Point3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Keeps the points inside `box`; `kept` receives original indices when given.
PointCloud crop(const PointCloud& cloud, const CropBox& box,
                std::vector<std::size_t>* kept = nullptr);

}  // namespace edgepose
