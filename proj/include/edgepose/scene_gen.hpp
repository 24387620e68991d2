#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edgepose/cuboid_pose.hpp"
#include "edgepose/point_cloud.hpp"

namespace edgepose {

/// Face ids: 0 +x, 1 -x, 2 +y, 3 -y, 4 +z, 5 -z in the local frame.
inline constexpr int kFaceCount = 6;

struct SurfaceLabels {
  std::vector<int> face;
  std::vector<bool> boundary;  // within one pitch of the face border
};

struct SurfaceSample {
  PointCloud cloud;
  SurfaceLabels labels;
};

/// Grid-samples each camera-facing face of the posed cuboid and adds isotropic
/// Gaussian noise of `sigma` meters.
SurfaceSample sample_cuboid_surface(const CuboidDims& dims, const Pose& pose, double pitch,
                                    double sigma, const Point3& camera, std::uint64_t seed);

/// Whether local face `face` of a posed cuboid faces the camera.
bool face_visible(const CuboidDims& dims, const Pose& pose, int face, const Point3& camera);

struct SceneSpec {
  CuboidDims dims;
  std::size_t count = 1;
  Point3 position_min{-0.15, -0.15, 0.6};
  Point3 position_max{0.15, 0.15, 0.8};
  double max_tilt = 0.15;  // radians away from height-axis-toward-camera
  double pitch = 0.002;
  double noise = 0.0;
  Point3 camera = Point3::Zero();
  double min_gap = 0.01;  // clearance between placed boxes
  std::size_t max_attempts = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SceneGroundTruth {
  CuboidDims dims;
  std::vector<Pose> poses;
  std::vector<int> cuboid;  // per point
  std::vector<int> face;
  std::vector<bool> boundary;
};

struct Scene {
  PointCloud cloud;
  SceneGroundTruth truth;
};

/// Defaults for `count` boxes; more than one box widens the placement region
/// to a 0.5 m square so five desk-sized boxes fit without crowding.
SceneSpec scene_spec_for(const CuboidDims& dims, std::size_t count, double noise,
                         std::uint64_t seed);

/// Places `count` non-overlapping cuboids by rejection sampling and merges
/// their surface samples. Throws std::runtime_error when placement fails
/// within `max_attempts` draws per box.
Scene gen_clutter_scene(const SceneSpec& spec);

/// Separating-axis overlap test between two posed boxes, each inflated by
/// `margin` on every side.
bool boxes_overlap(const CuboidDims& dims_a, const Pose& a, const CuboidDims& dims_b,
                   const Pose& b, double margin = 0.0);

struct PlanarPatch {
  PointCloud cloud;
  std::vector<bool> boundary;
};

/// Flat width x height grid in the z = 0 plane centered at the origin.
PlanarPatch sample_planar_patch(double width, double height, double pitch, double sigma,
                                std::uint64_t seed);

}  // namespace edgepose
