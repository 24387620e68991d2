#include <doctest.h>

#include <numbers>
#include <set>

#include "edgepose/pipeline.hpp"
#include "edgepose/report_io.hpp"
#include "edgepose/scene_gen.hpp"
#include "edgepose/waypoints.hpp"

using namespace edgepose;

namespace {

const CuboidDims kBox{0.2, 0.1, 0.05};

bool acceptable(const Pose& est, const Pose& truth) {
  return rotation_error_mod_symmetry(est.rotation, truth.rotation, kBox) <
             5.0 * std::numbers::pi / 180.0 &&
         (est.translation - truth.translation).norm() < 0.01;
}

}  // namespace

TEST_CASE("isolated box with top and two side faces: one acceptable pose") {
  Pose truth;
  truth.rotation = Eigen::AngleAxisd(std::numbers::pi, Vector3::UnitX()).toRotationMatrix() *
                   Eigen::AngleAxisd(0.4, Vector3::UnitZ()).toRotationMatrix();
  truth.translation = Vector3(0.25, 0.2, 0.6);
  const SurfaceSample s = sample_cuboid_surface(kBox, truth, 0.002, 0.001, Point3::Zero(), 9);
  std::set<int> faces(s.labels.face.begin(), s.labels.face.end());
  REQUIRE(faces.size() == 3);
  const PipelineResult r = estimate_poses(s.cloud, kBox, {}, 1);
  REQUIRE(r.poses.size() == 1);
  CHECK(acceptable(r.poses[0].pose, truth));
  CHECK(r.timings.total() > 0.0);
}

TEST_CASE("empty scene gives no poses") {
  const PipelineResult r = estimate_poses(PointCloud{}, kBox, {}, 1);
  CHECK(r.poses.empty());
  CHECK(r.segments.empty());
}

TEST_CASE("clutter of five: at least one acceptable pose") {
  const Scene sc = gen_clutter_scene(scene_spec_for(kBox, 5, 0.001, 3));
  const PipelineResult r = estimate_poses(sc.cloud, kBox, {}, 3);
  bool any = false;
  for (const auto& est : r.poses) {
    for (const auto& t : sc.truth.poses) any = any || acceptable(est.pose, t);
  }
  CHECK(any);
  const json j = estimates_to_json(r, kBox);
  REQUIRE(j["poses"].size() == r.poses.size());
  for (const auto& p : j["poses"]) CHECK(p.contains("quality"));
}

TEST_CASE("wildly wrong dims: no poses, diagnostics present") {
  const Scene sc = gen_clutter_scene(scene_spec_for(kBox, 1, 0.001, 4));
  const PipelineResult r = estimate_poses(sc.cloud, CuboidDims{0.6, 0.45, 0.3}, {}, 4);
  CHECK(r.poses.empty());
  CHECK(!r.diagnostics.empty());
}

TEST_CASE("crop box removes points before scoring") {
  const Scene sc = gen_clutter_scene(scene_spec_for(kBox, 1, 0.0, 6));
  PipelineParams params;
  params.crop = CropBox{Point3(-5, -5, -5), Point3(-4, -4, -4)};
  const PipelineResult r = estimate_poses(sc.cloud, kBox, params, 6);
  CHECK(r.edges.empty());
  CHECK(r.poses.empty());
}

TEST_CASE("waypoints") {
  const Waypoints w = plan_pick_waypoints(Point3(0.4, 0.1, 0.05), 0.1, 0.2, Point3::Zero(),
                                          Point3(1, 1, 1));
  CHECK((w.mid - Point3(0.4, 0.1, 0.15)).norm() < 1e-12);
  CHECK((w.retrieval - Point3(0.4, 0.1, 0.25)).norm() < 1e-12);
  const auto order = w.ordered();
  CHECK(order[0] == w.initial);
  CHECK(order[2] == w.goal);
  CHECK(order[4] == w.final_point);
  CHECK_THROWS_AS(plan_pick_waypoints(Point3::Zero(), 0.0, 0.2, Point3::Zero(), Point3::Zero()),
                  std::invalid_argument);
  CHECK_THROWS_AS(plan_pick_waypoints(Point3::Zero(), 0.1, -1.0, Point3::Zero(), Point3::Zero()),
                  std::invalid_argument);
  const json j = waypoints_to_json(w);
  CHECK(j["waypoints"][1]["name"] == "M");
}

TEST_CASE("report round trips") {
  const Scene sc = gen_clutter_scene(scene_spec_for(kBox, 2, 0.001, 8));
  const SceneGroundTruth back = truth_from_json(json::parse(truth_to_json(sc.truth).dump()));
  CHECK(back.cuboid == sc.truth.cuboid);
  CHECK(back.face == sc.truth.face);
  CHECK(back.boundary == sc.truth.boundary);
  REQUIRE(back.poses.size() == 2);
  CHECK((back.poses[1].rotation - sc.truth.poses[1].rotation).norm() < 1e-12);

  const std::vector<int> v{1, 1, 2, 2, 2, 0};
  CHECK(run_length_decode(run_length_encode(v)) == v);
  CHECK(run_length_encode(v).dump() == "[[1,2],[2,3],[0,1]]");
}
