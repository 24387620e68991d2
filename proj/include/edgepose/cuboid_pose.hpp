#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "edgepose/line_extract.hpp"
#include "edgepose/point_cloud.hpp"

namespace edgepose {

/// Local object axes: x along length, y along breadth, z along height.
enum class Axis { kLength = 0, kBreadth = 1, kHeight = 2 };

const char* axis_name(Axis a);

struct CuboidDims {
  double length = 0.0;
  double breadth = 0.0;
  double height = 0.0;

  void validate() const;
  double along(Axis a) const;
  Vector3 half_extents() const { return Vector3(length, breadth, height) / 2.0; }
  /// The eight corners in the local frame, ordered by (sx, sy, sz) bits.
  std::array<Point3, 8> corners() const;
  /// "distinct", "square_lb", "square_lh", "square_bh" or "cube".
  std::string symmetry_class() const;
};

/// Rigid transform from the local object frame to the camera frame.
struct Pose {
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  Point3 apply(const Point3& local) const { return rotation * local + translation; }
  Eigen::Quaterniond quaternion() const;  // w >= 0
};

/// Failures of the pose stage: ambiguous labels, grazing views, rank-deficient
/// correspondence sets, non-intersecting segments.
class PoseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PoseTolerances {
  double orthogonal_cos = 0.1;     // |cos| between directions
  double corner_distance = 0.01;   // endpoint gap for an intersection, meters
  double dim_rel_tol = 0.2;        // relative tolerance for length labels
  double refine_gate = 0.02;       // max corner match distance, meters
  double grazing_cos = 0.05;       // min |d . t|

  void validate() const;
};

bool segments_orthogonal(const LineSegment& l1, const LineSegment& l2, double tol = 0.1);

/// Midpoint of the closest endpoint pair when that pair is within `tol`.
std::optional<Point3> segments_intersect(const LineSegment& l1, const LineSegment& l2,
                                         double tol = 0.01);

struct EdgeGroup {
  std::vector<std::size_t> segments;                       // indices into A, discovery order
  std::vector<std::pair<std::size_t, std::size_t>> links;  // clubbed (l1, l2) pairs
  std::vector<Point3> corners;                             // merged pairwise intersections
  bool posable() const { return segments.size() >= 2; }
};

/// Groups the segments of one cuboid starting at `start`: chains orthogonal,
/// intersecting partners, resuming from earlier members until no unused
/// segment connects. `available` marks the segments still in A; every member
/// of the returned group is cleared from it.
EdgeGroup club_edges(std::span<const LineSegment> segments, std::vector<bool>& available,
                     std::size_t start, const PoseTolerances& tol = {});

struct CornerTriplet {
  Point3 p1;  // shared corner
  Point3 p2;  // far end of l1
  Point3 p3;  // far end of l2
  Vector3 d1, d2, t, d;
};

/// Throws PoseError when the segments do not intersect within
/// `corner_distance` or are parallel.
CornerTriplet corner_triplet(const LineSegment& l1, const LineSegment& l2,
                             double corner_distance = 0.01);

enum class DimLabel { kLength, kBreadth, kHeight, kAmbiguous };

/// Nearest dimension within `rel_tol` relative error; ambiguous when none or
/// several dimensions match.
DimLabel classify_edge_dimension(double length, const CuboidDims& dims, double rel_tol = 0.2);

/// Axis labels for a pair of edges. Unlike classify_edge_dimension, matches
/// among equal dimensions are resolved in discovery order.
std::optional<std::pair<Axis, Axis>> resolve_labels(double len1, double len2,
                                                    const CuboidDims& dims, double rel_tol);

struct Correspondence {
  Point3 camera;
  Point3 local;
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;
  Vector3 remaining_axis;  // camera-frame direction of the unlabeled local axis
  int sign1 = 1;           // local sign of d1 along its axis
  int sign2 = 1;
};

/// Chooses signs so the unlabeled local axis points toward the camera (d1
/// keeps its sign; d2 flips when needed) and emits the three correspondences.
/// `far_face` places the corner on the face pointing away from the camera,
/// for an L seen as the far rim of two visible side faces.
CorrespondenceSet assign_directions(const CornerTriplet& triplet, Axis label1, Axis label2,
                                    const CuboidDims& dims, double grazing_cos = 0.05,
                                    bool far_face = false);

/// Least-squares rigid transform local -> camera. Throws PoseError for fewer
/// than three pairs or collinear local points.
Pose pose_from_correspondences(std::span<const Correspondence> pairs);

struct RefineResult {
  Pose pose;
  std::vector<Correspondence> pairs;  // pairs used by the final solve
  std::size_t new_matches = 0;
  double mean_residual = 0.0;
};

/// Matches the group's corners to the model corners predicted by `initial`
/// (greedy by distance, each model corner once, gated) and re-solves with the
/// initial pairs plus the new matches.
RefineResult refine_pose(const Pose& initial, const CorrespondenceSet& initial_pairs,
                         const EdgeGroup& group, const CuboidDims& dims, double gate = 0.02);

/// Rotation angle (radians) of the smallest relative rotation between
/// `estimate` and `truth` over the cuboid's symmetry group.
double rotation_error_mod_symmetry(const Matrix3& estimate, const Matrix3& truth,
                                   const CuboidDims& dims);

}  // namespace edgepose
