#include "edgepose/report_io.hpp"

#include <stdexcept>

namespace edgepose {

json point_to_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

Point3 point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("point must be [x, y, z]");
  return Point3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json segments_to_json(std::span<const LineSegment> segments) {
  json out = json::array();
  for (const auto& s : segments) {
    out.push_back({{"e1", point_to_json(s.e1)},
                   {"e2", point_to_json(s.e2)},
                   {"length", s.length()},
                   {"member_count", s.members.size()},
                   {"one_sided", s.one_sided}});
  }
  return out;
}

json pose_to_json(const Pose& pose) {
  const auto q = pose.quaternion();
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back(json::array({pose.rotation(r, 0), pose.rotation(r, 1), pose.rotation(r, 2)}));
  }
  return {{"quaternion_wxyz", json::array({q.w(), q.x(), q.y(), q.z()})},
          {"rotation", rot},
          {"translation", point_to_json(pose.translation)}};
}

Pose pose_from_json(const json& j) {
  Pose pose;
  const json& rot = j.at("rotation");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) pose.rotation(r, c) = rot.at(r).at(c).get<double>();
  }
  pose.translation = point_from_json(j.at("translation"));
  return pose;
}

namespace {

json dims_to_json(const CuboidDims& d) {
  return {{"length", d.length}, {"breadth", d.breadth}, {"height", d.height}};
}

CuboidDims dims_from_json(const json& j) {
  return {j.at("length").get<double>(), j.at("breadth").get<double>(),
          j.at("height").get<double>()};
}

}  // namespace

json estimates_to_json(const PipelineResult& result, const CuboidDims& dims) {
  json poses = json::array();
  for (const auto& est : result.poses) {
    json p = pose_to_json(est.pose);
    const auto& q = est.quality;
    p["quality"] = {{"group", q.group},
                    {"segment_count", q.segment_count},
                    {"corner_count", q.corner_count},
                    {"correspondences", q.correspondences},
                    {"mean_corner_residual", q.mean_corner_residual},
                    {"one_sided", q.one_sided},
                    {"far_corner", q.far_corner},
                    {"labels", json::array({axis_name(q.label1), axis_name(q.label2)})},
                    {"symmetry", q.symmetry}};
    poses.push_back(std::move(p));
  }
  return {{"dims", dims_to_json(dims)},
          {"edge_points", result.edges.size()},
          {"segments", segments_to_json(result.segments)},
          {"group_count", result.groups.size()},
          {"poses", poses},
          {"diagnostics", result.diagnostics}};
}

json run_length_encode(std::span<const int> values) {
  json out = json::array();
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    out.push_back(json::array({values[i], j - i}));
    i = j;
  }
  return out;
}

std::vector<int> run_length_decode(const json& runs) {
  std::vector<int> out;
  for (const auto& run : runs) {
    const int v = run.at(0).get<int>();
    const auto n = run.at(1).get<std::size_t>();
    out.insert(out.end(), n, v);
  }
  return out;
}

json truth_to_json(const SceneGroundTruth& truth) {
  json poses = json::array();
  for (const auto& p : truth.poses) poses.push_back(pose_to_json(p));
  const std::vector<int> boundary(truth.boundary.begin(), truth.boundary.end());
  return {{"dims", dims_to_json(truth.dims)},
          {"poses", poses},
          {"point_count", truth.cuboid.size()},
          {"labels",
           {{"cuboid", run_length_encode(truth.cuboid)},
            {"face", run_length_encode(truth.face)},
            {"boundary", run_length_encode(boundary)}}}};
}

SceneGroundTruth truth_from_json(const json& j) {
  SceneGroundTruth t;
  t.dims = dims_from_json(j.at("dims"));
  for (const auto& p : j.at("poses")) t.poses.push_back(pose_from_json(p));
  const json& labels = j.at("labels");
  t.cuboid = run_length_decode(labels.at("cuboid"));
  t.face = run_length_decode(labels.at("face"));
  for (int b : run_length_decode(labels.at("boundary"))) t.boundary.push_back(b != 0);
  if (t.face.size() != t.cuboid.size() || t.boundary.size() != t.cuboid.size()) {
    throw std::invalid_argument("ground-truth label arrays differ in length");
  }
  return t;
}

json waypoints_to_json(const Waypoints& w) {
  const char* names[] = {"I", "M", "G", "R", "F"};
  json order = json::array();
  const auto pts = w.ordered();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    order.push_back({{"name", names[i]}, {"point", point_to_json(pts[i])}});
  }
  return {{"waypoints", order}};
}

}  // namespace edgepose
