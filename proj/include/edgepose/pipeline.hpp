#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgepose/cuboid_pose.hpp"
#include "edgepose/edge_detect.hpp"
#include "edgepose/line_extract.hpp"

namespace edgepose {

struct PipelineParams {
  EdgeParams edge;
  ExtractParams extract;
  PoseTolerances pose;
  std::optional<CropBox> crop;

  void validate() const;
};

struct PoseQuality {
  std::size_t group = 0;           // index of the edge group
  std::size_t segment_count = 0;
  std::size_t corner_count = 0;    // detected corners in the group
  std::size_t correspondences = 0; // pairs in the final solve
  double mean_corner_residual = 0.0;
  bool one_sided = false;          // any segment of the group is one-sided
  bool far_corner = false;         // corner judged to be on the face away from the camera
  Axis label1 = Axis::kLength;
  Axis label2 = Axis::kBreadth;
  std::string symmetry;
};

struct PoseEstimate {
  Pose pose;     // after corner refinement
  Pose initial;  // three-point solve from the chosen corner
  PoseQuality quality;
};

/// Wall-clock seconds per stage.
struct StageTimings {
  double edge_points = 0.0;
  double all_edges = 0.0;
  double model_fitting = 0.0;
  double total() const { return edge_points + all_edges + model_fitting; }
};

struct PipelineResult {
  std::vector<PoseEstimate> poses;
  std::vector<std::string> diagnostics;
  PointCloud edges;                   // edge cloud E (after cropping)
  std::vector<std::size_t> edge_source;  // index of each edge point in the cropped input
  std::vector<LineSegment> segments;  // members index into `edges`
  std::vector<EdgeGroup> groups;
  StageTimings timings;
};

/// Edge points, then segments, then clubbing from every unused start
/// segment, then a pose per posable group with corner refinement. Poses whose
/// centers fall within half the smallest dimension of a better pose are
/// dropped as duplicates.
PipelineResult estimate_poses(const PointCloud& cloud, const CuboidDims& dims,
                              const PipelineParams& params, std::uint64_t seed);

}  // namespace edgepose
