#pragma once

#include <array>

#include "edgepose/point_cloud.hpp"

namespace edgepose {

/// Pick-and-place path: initial, mid (above goal), goal, retrieval, final.
struct Waypoints {
  Point3 initial;
  Point3 mid;
  Point3 goal;
  Point3 retrieval;
  Point3 final_point;

  std::array<Point3, 5> ordered() const { return {initial, mid, goal, retrieval, final_point}; }
};

/// mid = goal + approach * up, retrieval = goal + lift * up. Throws
/// std::invalid_argument unless approach and lift are positive and `up` is
/// nonzero (it is normalized).
Waypoints plan_pick_waypoints(const Point3& goal, double approach, double lift,
                              const Point3& initial, const Point3& final_point,
                              const Vector3& up = Vector3::UnitZ());

}  // namespace edgepose
