#include "edgepose/scene_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

#include "edgepose/random.hpp"

namespace edgepose {

namespace {

struct FaceFrame {
  int axis;    // normal axis
  double sign; // +1 or -1
  int u;       // in-face axes
  int v;
};

FaceFrame face_frame(int face) {
  const int axis = face / 2;
  return {axis, face % 2 == 0 ? 1.0 : -1.0, (axis + 1) % 3, (axis + 2) % 3};
}

std::size_t samples_along(double extent, double pitch) {
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(extent / pitch)) + 1);
}

}  // namespace

bool face_visible(const CuboidDims& dims, const Pose& pose, int face, const Point3& camera) {
  const FaceFrame f = face_frame(face);
  Vector3 normal_local = Vector3::Zero();
  normal_local[f.axis] = f.sign;
  const Point3 center = pose.apply(normal_local * dims.half_extents()[f.axis]);
  return (pose.rotation * normal_local).dot(camera - center) > 0.0;
}

SurfaceSample sample_cuboid_surface(const CuboidDims& dims, const Pose& pose, double pitch,
                                    double sigma, const Point3& camera, std::uint64_t seed) {
  dims.validate();
  if (!(pitch > 0.0)) throw std::invalid_argument("pitch must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");

  Rng rng(seed);
  SurfaceSample out;
  const Vector3 half = dims.half_extents();
  constexpr double kSlack = 1e-12;

  for (int face = 0; face < kFaceCount; ++face) {
    if (!face_visible(dims, pose, face, camera)) continue;
    const FaceFrame f = face_frame(face);
    const std::size_t nu = samples_along(2.0 * half[f.u], pitch);
    const std::size_t nv = samples_along(2.0 * half[f.v], pitch);
    const double su = 2.0 * half[f.u] / static_cast<double>(nu - 1);
    const double sv = 2.0 * half[f.v] / static_cast<double>(nv - 1);
    for (std::size_t i = 0; i < nu; ++i) {
      for (std::size_t j = 0; j < nv; ++j) {
        Point3 local;
        local[f.axis] = f.sign * half[f.axis];
        local[f.u] = -half[f.u] + static_cast<double>(i) * su;
        local[f.v] = -half[f.v] + static_cast<double>(j) * sv;
        Point3 p = pose.apply(local);
        if (sigma > 0.0) p += Vector3(rng.normal(sigma), rng.normal(sigma), rng.normal(sigma));
        const double border_u = static_cast<double>(std::min(i, nu - 1 - i)) * su;
        const double border_v = static_cast<double>(std::min(j, nv - 1 - j)) * sv;
        out.cloud.push_back(p);
        out.labels.face.push_back(face);
        out.labels.boundary.push_back(std::min(border_u, border_v) <= pitch + kSlack);
      }
    }
  }
  return out;
}

void SceneSpec::validate() const {
  dims.validate();
  if (!(pitch > 0.0)) throw std::invalid_argument("pitch must be positive");
  if (!(noise >= 0.0)) throw std::invalid_argument("noise must be non-negative");
  if (!(max_tilt >= 0.0)) throw std::invalid_argument("max tilt must be non-negative");
  if (!(min_gap >= 0.0)) throw std::invalid_argument("min gap must be non-negative");
  if (!(position_min.array() <= position_max.array()).all()) {
    throw std::invalid_argument("position range is inverted");
  }
}

bool boxes_overlap(const CuboidDims& dims_a, const Pose& a, const CuboidDims& dims_b,
                   const Pose& b, double margin) {
  const Vector3 ha = dims_a.half_extents().array() + margin;
  const Vector3 hb = dims_b.half_extents().array() + margin;
  const Vector3 delta = b.translation - a.translation;

  std::vector<Vector3> axes;
  for (int i = 0; i < 3; ++i) axes.push_back(a.rotation.col(i));
  for (int i = 0; i < 3; ++i) axes.push_back(b.rotation.col(i));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Vector3 c = a.rotation.col(i).cross(b.rotation.col(j));
      if (c.norm() > 1e-9) axes.push_back(c.normalized());
    }
  }
  for (const Vector3& axis : axes) {
    double ra = 0.0, rb = 0.0;
    for (int i = 0; i < 3; ++i) {
      ra += ha[i] * std::abs(a.rotation.col(i).dot(axis));
      rb += hb[i] * std::abs(b.rotation.col(i).dot(axis));
    }
    if (std::abs(delta.dot(axis)) > ra + rb) return false;
  }
  return true;
}

namespace {

Pose sample_pose(const SceneSpec& spec, Rng& rng) {
  const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double tilt_dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double tilt = rng.uniform(0.0, spec.max_tilt);
  Pose pose;
  // Height axis toward the camera (camera looks along +z), then yaw about it
  // and a bounded tilt about a horizontal axis.
  const Matrix3 flip = Eigen::AngleAxisd(std::numbers::pi, Vector3::UnitX()).toRotationMatrix();
  const Matrix3 spin = Eigen::AngleAxisd(yaw, Vector3::UnitZ()).toRotationMatrix();
  const Matrix3 lean =
      Eigen::AngleAxisd(tilt, Vector3(std::cos(tilt_dir), std::sin(tilt_dir), 0.0))
          .toRotationMatrix();
  pose.rotation = lean * flip * spin;
  for (int k = 0; k < 3; ++k) {
    pose.translation[k] = rng.uniform(spec.position_min[k], spec.position_max[k]);
  }
  return pose;
}

}  // namespace

SceneSpec scene_spec_for(const CuboidDims& dims, std::size_t count, double noise,
                         std::uint64_t seed) {
  SceneSpec spec;
  spec.dims = dims;
  spec.count = count;
  spec.noise = noise;
  spec.seed = seed;
  if (count > 1) {
    spec.position_min = Point3(-0.25, -0.25, 0.6);
    spec.position_max = Point3(0.25, 0.25, 0.75);
  }
  return spec;
}

Scene gen_clutter_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Scene scene;
  scene.truth.dims = spec.dims;

  for (std::size_t n = 0; n < spec.count; ++n) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
      const Pose candidate = sample_pose(spec, rng);
      bool clear = true;
      for (const Pose& other : scene.truth.poses) {
        if (boxes_overlap(spec.dims, candidate, spec.dims, other, spec.min_gap / 2.0)) {
          clear = false;
          break;
        }
      }
      if (clear) {
        scene.truth.poses.push_back(candidate);
        placed = true;
      }
    }
    if (!placed) {
      throw std::runtime_error("could not place cuboid " + std::to_string(n + 1) + " of " +
                               std::to_string(spec.count) + " after " +
                               std::to_string(spec.max_attempts) + " attempts");
    }
  }

  for (std::size_t n = 0; n < scene.truth.poses.size(); ++n) {
    const SurfaceSample s = sample_cuboid_surface(spec.dims, scene.truth.poses[n], spec.pitch,
                                                  spec.noise, spec.camera, rng.next());
    scene.cloud.points.insert(scene.cloud.points.end(), s.cloud.points.begin(),
                              s.cloud.points.end());
    scene.truth.cuboid.insert(scene.truth.cuboid.end(), s.cloud.size(), static_cast<int>(n));
    scene.truth.face.insert(scene.truth.face.end(), s.labels.face.begin(), s.labels.face.end());
    scene.truth.boundary.insert(scene.truth.boundary.end(), s.labels.boundary.begin(),
                                s.labels.boundary.end());
  }
  return scene;
}

PlanarPatch sample_planar_patch(double width, double height, double pitch, double sigma,
                                std::uint64_t seed) {
  if (!(width > 0.0 && height > 0.0)) throw std::invalid_argument("patch size must be positive");
  if (!(pitch > 0.0)) throw std::invalid_argument("pitch must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
  Rng rng(seed);
  const std::size_t nu = samples_along(width, pitch);
  const std::size_t nv = samples_along(height, pitch);
  const double su = width / static_cast<double>(nu - 1);
  const double sv = height / static_cast<double>(nv - 1);
  PlanarPatch out;
  out.cloud.points.reserve(nu * nv);
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nv; ++j) {
      Point3 p(-width / 2.0 + static_cast<double>(i) * su,
               -height / 2.0 + static_cast<double>(j) * sv, 0.0);
      if (sigma > 0.0) p += Vector3(rng.normal(sigma), rng.normal(sigma), rng.normal(sigma));
      const double border = std::min(static_cast<double>(std::min(i, nu - 1 - i)) * su,
                                     static_cast<double>(std::min(j, nv - 1 - j)) * sv);
      out.cloud.push_back(p);
      out.boundary.push_back(border <= pitch + 1e-12);
    }
  }
  return out;
}

}  // namespace edgepose
