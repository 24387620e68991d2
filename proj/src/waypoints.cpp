#include "edgepose/waypoints.hpp"

#include <stdexcept>

namespace edgepose {

Waypoints plan_pick_waypoints(const Point3& goal, double approach, double lift,
                              const Point3& initial, const Point3& final_point,
                              const Vector3& up) {
  if (!(approach > 0.0)) throw std::invalid_argument("approach distance must be positive");
  if (!(lift > 0.0)) throw std::invalid_argument("lift height must be positive");
  if (!(up.norm() > 0.0)) throw std::invalid_argument("up vector must be nonzero");
  const Vector3 z = up.normalized();
  return {initial, goal + approach * z, goal, goal + lift * z, final_point};
}

}  // namespace edgepose
