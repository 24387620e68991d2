#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "edgepose/line_extract.hpp"
#include "edgepose/pipeline.hpp"
#include "edgepose/scene_gen.hpp"
#include "edgepose/waypoints.hpp"

namespace edgepose {

using nlohmann::json;

json point_to_json(const Point3& p);
Point3 point_from_json(const json& j);

/// e1, e2, length, member_count, one_sided per segment.
json segments_to_json(std::span<const LineSegment> segments);

/// Quaternion (w, x, y, z), row-major 3x3 rotation, translation in meters.
json pose_to_json(const Pose& pose);
Pose pose_from_json(const json& j);

json estimates_to_json(const PipelineResult& result, const CuboidDims& dims);

/// Poses plus run-length encoded per-point labels.
json truth_to_json(const SceneGroundTruth& truth);
SceneGroundTruth truth_from_json(const json& j);

json waypoints_to_json(const Waypoints& w);

/// [[value, run], ...] pairs.
json run_length_encode(std::span<const int> values);
std::vector<int> run_length_decode(const json& runs);

}  // namespace edgepose
