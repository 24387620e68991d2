#include "edgepose/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "edgepose/spatial_index.hpp"

namespace edgepose {

void PipelineParams::validate() const {
  edge.validate();
  extract.validate();
  pose.validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct PairChoice {
  std::size_t first;   // indices into the segment array
  std::size_t second;
  Axis label1;
  Axis label2;
  CornerTriplet triplet;
  double view;         // |d . t|
};

// Best-conditioned labelled pair of the group: the connected pair whose
// spanned face looks most directly at the camera.
std::optional<PairChoice> choose_pair(const std::vector<LineSegment>& segments,
                                      const EdgeGroup& group, const CuboidDims& dims,
                                      const PoseTolerances& tol, std::string& why) {
  std::optional<PairChoice> best;
  bool any_connected = false;
  for (std::size_t a = 0; a < group.segments.size(); ++a) {
    for (std::size_t b = a + 1; b < group.segments.size(); ++b) {
      const auto& s1 = segments[group.segments[a]];
      const auto& s2 = segments[group.segments[b]];
      if (!segments_orthogonal(s1, s2, tol.orthogonal_cos)) continue;
      if (!segments_intersect(s1, s2, tol.corner_distance)) continue;
      any_connected = true;
      const auto labels = resolve_labels(s1.length(), s2.length(), dims, tol.dim_rel_tol);
      if (!labels) continue;
      CornerTriplet t;
      try {
        t = corner_triplet(s1, s2, tol.corner_distance);
      } catch (const PoseError&) {
        continue;
      }
      const double view = std::abs(t.d.dot(t.t));
      if (view < tol.grazing_cos) continue;
      if (!best || view > best->view) {
        best = PairChoice{group.segments[a], group.segments[b], labels->first, labels->second,
                          t, view};
      }
    }
  }
  if (!best) {
    why = any_connected ? "no edge pair with unambiguous length labels and a usable view"
                        : "no orthogonal intersecting edge pair";
  }
  return best;
}

// The two edges of a corner on the camera-facing face have the rest of the box
// behind them; the far rim of two visible side faces has those faces in front.
// Compares the mean offset of nearby surface points along `toward` (the
// remaining axis, pointing at the camera) against a quarter of the radius.
bool corner_on_far_face(const SpatialIndex& index, const Point3& corner, const Vector3& toward,
                        double radius) {
  const auto near = index.radius_neighbors(corner, radius);
  if (near.empty()) return false;
  double sum = 0.0;
  for (std::size_t i : near) sum += (index.cloud()[i] - corner).dot(toward);
  return sum / static_cast<double>(near.size()) > radius / 4.0;
}

}  // namespace

PipelineResult estimate_poses(const PointCloud& cloud, const CuboidDims& dims,
                              const PipelineParams& params, std::uint64_t seed) {
  params.validate();
  dims.validate();
  PipelineResult out;

  const PointCloud* input = &cloud;
  PointCloud cropped;
  if (params.crop) {
    cropped = crop(cloud, *params.crop);
    input = &cropped;
  }

  auto start = Clock::now();
  {
    EdgeExtraction ex = extract_edge_points(*input, params.edge);
    out.edges = std::move(ex.edges);
    out.edge_source = std::move(ex.source_index);
  }
  out.timings.edge_points = seconds_since(start);

  start = Clock::now();
  out.segments = extract_all_segments(out.edges, params.extract, seed);
  out.timings.all_edges = seconds_since(start);

  start = Clock::now();
  std::vector<bool> available(out.segments.size(), true);
  for (std::size_t a = 0; a < out.segments.size(); ++a) {
    if (!available[a]) continue;
    out.groups.push_back(club_edges(out.segments, available, a, params.pose));
  }

  std::optional<SpatialIndex> surface;
  std::vector<PoseEstimate> candidates;
  for (std::size_t g = 0; g < out.groups.size(); ++g) {
    const EdgeGroup& group = out.groups[g];
    const std::string tag = "group " + std::to_string(g) + ": ";
    if (!group.posable()) {
      out.diagnostics.push_back(tag + "single segment, not posable");
      continue;
    }
    std::string why;
    const auto choice = choose_pair(out.segments, group, dims, params.pose, why);
    if (!choice) {
      out.diagnostics.push_back(tag + why);
      continue;
    }
    try {
      const CorrespondenceSet near_set = assign_directions(
          choice->triplet, choice->label1, choice->label2, dims, params.pose.grazing_cos);
      if (!surface) surface.emplace(*input);
      const bool far = corner_on_far_face(*surface, choice->triplet.p1, near_set.remaining_axis,
                                          params.edge.radius);
      const CorrespondenceSet initial =
          far ? assign_directions(choice->triplet, choice->label1, choice->label2, dims,
                                  params.pose.grazing_cos, true)
              : near_set;
      const Pose first = pose_from_correspondences(initial.pairs);
      const RefineResult refined =
          refine_pose(first, initial, group, dims, params.pose.refine_gate);

      PoseEstimate est;
      est.pose = refined.pose;
      est.initial = first;
      est.quality.group = g;
      est.quality.segment_count = group.segments.size();
      est.quality.corner_count = group.corners.size();
      est.quality.correspondences = refined.pairs.size();
      est.quality.mean_corner_residual = refined.mean_residual;
      est.quality.one_sided = std::any_of(group.segments.begin(), group.segments.end(),
                                          [&](std::size_t s) { return out.segments[s].one_sided; });
      est.quality.far_corner = far;
      est.quality.label1 = choice->label1;
      est.quality.label2 = choice->label2;
      est.quality.symmetry = dims.symmetry_class();
      candidates.push_back(est);
    } catch (const PoseError& e) {
      out.diagnostics.push_back(tag + e.what());
    }
  }

  // Keep the best-supported pose among candidates with nearby centers.
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& qa = candidates[a].quality;
    const auto& qb = candidates[b].quality;
    if (qa.correspondences != qb.correspondences) return qa.correspondences > qb.correspondences;
    return qa.mean_corner_residual < qb.mean_corner_residual;
  });
  const double near = std::min({dims.length, dims.breadth, dims.height}) / 2.0;
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const auto dup = std::find_if(kept.begin(), kept.end(), [&](std::size_t k) {
      return (candidates[k].pose.translation - candidates[i].pose.translation).norm() < near;
    });
    if (dup != kept.end()) {
      out.diagnostics.push_back("group " + std::to_string(candidates[i].quality.group) +
                                ": duplicate of group " +
                                std::to_string(candidates[*dup].quality.group));
      continue;
    }
    kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  for (std::size_t i : kept) out.poses.push_back(candidates[i]);
  out.timings.model_fitting = seconds_since(start);
  return out;
}

}  // namespace edgepose
