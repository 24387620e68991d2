#include "edgepose/cuboid_pose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

namespace edgepose {

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::kLength: return "length";
    case Axis::kBreadth: return "breadth";
    case Axis::kHeight: return "height";
  }
  return "?";
}

void CuboidDims::validate() const {
  if (!(length > 0.0 && breadth > 0.0 && height > 0.0)) {
    throw std::invalid_argument("cuboid dimensions must be positive");
  }
}

double CuboidDims::along(Axis a) const {
  switch (a) {
    case Axis::kLength: return length;
    case Axis::kBreadth: return breadth;
    case Axis::kHeight: return height;
  }
  return 0.0;
}

std::array<Point3, 8> CuboidDims::corners() const {
  const Vector3 h = half_extents();
  std::array<Point3, 8> out;
  for (int k = 0; k < 8; ++k) {
    out[k] = Point3((k & 1) ? h.x() : -h.x(), (k & 2) ? h.y() : -h.y(), (k & 4) ? h.z() : -h.z());
  }
  return out;
}

namespace {
bool same_dim(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(a, b); }
}  // namespace

std::string CuboidDims::symmetry_class() const {
  const bool lb = same_dim(length, breadth);
  const bool lh = same_dim(length, height);
  const bool bh = same_dim(breadth, height);
  if (lb && lh) return "cube";
  if (lb) return "square_lb";
  if (lh) return "square_lh";
  if (bh) return "square_bh";
  return "distinct";
}

Eigen::Quaterniond Pose::quaternion() const {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

void PoseTolerances::validate() const {
  if (!(orthogonal_cos >= 0.0 && orthogonal_cos < 1.0)) {
    throw std::invalid_argument("orthogonality tolerance must lie in [0, 1)");
  }
  if (!(corner_distance > 0.0)) throw std::invalid_argument("corner distance must be positive");
  if (!(dim_rel_tol > 0.0)) throw std::invalid_argument("dimension tolerance must be positive");
  if (!(refine_gate > 0.0)) throw std::invalid_argument("refinement gate must be positive");
  if (!(grazing_cos >= 0.0 && grazing_cos < 1.0)) {
    throw std::invalid_argument("grazing tolerance must lie in [0, 1)");
  }
}

bool segments_orthogonal(const LineSegment& l1, const LineSegment& l2, double tol) {
  if (!(l1.length() > 0.0) || !(l2.length() > 0.0)) return false;
  return std::abs(l1.direction().dot(l2.direction())) <= tol;
}

namespace {

struct EndpointPair {
  int end1;  // 0 -> e1, 1 -> e2
  int end2;
  double distance;
};

const Point3& endpoint(const LineSegment& s, int end) { return end == 0 ? s.e1 : s.e2; }

EndpointPair closest_endpoints(const LineSegment& l1, const LineSegment& l2) {
  EndpointPair best{0, 0, std::numeric_limits<double>::infinity()};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double d = (endpoint(l1, a) - endpoint(l2, b)).norm();
      if (d < best.distance) best = {a, b, d};
    }
  }
  return best;
}

bool connects(const LineSegment& l1, const LineSegment& l2, const PoseTolerances& tol) {
  return segments_orthogonal(l1, l2, tol.orthogonal_cos) &&
         segments_intersect(l1, l2, tol.corner_distance).has_value();
}

}  // namespace

std::optional<Point3> segments_intersect(const LineSegment& l1, const LineSegment& l2,
                                         double tol) {
  const EndpointPair c = closest_endpoints(l1, l2);
  if (!(c.distance <= tol)) return std::nullopt;
  return Point3((endpoint(l1, c.end1) + endpoint(l2, c.end2)) / 2.0);
}

EdgeGroup club_edges(std::span<const LineSegment> segments, std::vector<bool>& available,
                     std::size_t start, const PoseTolerances& tol) {
  if (start >= segments.size()) throw std::out_of_range("start segment out of range");
  if (available.size() != segments.size()) {
    throw std::invalid_argument("availability mask does not match segment count");
  }
  EdgeGroup group;
  std::vector<bool> in_group(segments.size(), false);
  group.segments.push_back(start);
  in_group[start] = true;

  auto partner_of = [&](std::size_t l1) -> std::optional<std::size_t> {
    for (std::size_t j = 0; j < segments.size(); ++j) {
      if (j == l1 || !available[j] || in_group[j]) continue;
      if (connects(segments[l1], segments[j], tol)) return j;
    }
    return std::nullopt;
  };

  std::size_t current = start;
  for (;;) {
    if (auto l2 = partner_of(current)) {
      group.links.emplace_back(current, *l2);
      group.segments.push_back(*l2);
      in_group[*l2] = true;
      available[current] = false;
      current = *l2;
      continue;
    }
    // The chain ran dry at `current`; resume from an earlier member that still
    // has an unused partner (a corner where three edges meet).
    bool resumed = false;
    for (std::size_t m : group.segments) {
      if (partner_of(m)) {
        current = m;
        resumed = true;
        break;
      }
    }
    if (!resumed) break;
  }
  for (std::size_t m : group.segments) available[m] = false;

  // Corners from every connected pair, merged when within the corner tolerance.
  struct Cluster {
    Vector3 sum;
    int count;
    Point3 mean() const { return sum / count; }
  };
  std::vector<Cluster> clusters;
  for (std::size_t a = 0; a < group.segments.size(); ++a) {
    for (std::size_t b = a + 1; b < group.segments.size(); ++b) {
      const auto& s1 = segments[group.segments[a]];
      const auto& s2 = segments[group.segments[b]];
      if (!segments_orthogonal(s1, s2, tol.orthogonal_cos)) continue;
      const auto c = segments_intersect(s1, s2, tol.corner_distance);
      if (!c) continue;
      auto it = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& cl) {
        return (cl.mean() - *c).norm() <= tol.corner_distance;
      });
      if (it == clusters.end()) {
        clusters.push_back({*c, 1});
      } else {
        it->sum += *c;
        ++it->count;
      }
    }
  }
  for (const auto& cl : clusters) group.corners.push_back(cl.mean());
  return group;
}

CornerTriplet corner_triplet(const LineSegment& l1, const LineSegment& l2,
                             double corner_distance) {
  const EndpointPair c = closest_endpoints(l1, l2);
  if (!(c.distance <= corner_distance)) throw PoseError("segments do not intersect");
  CornerTriplet t;
  t.p1 = (endpoint(l1, c.end1) + endpoint(l2, c.end2)) / 2.0;
  t.p2 = endpoint(l1, 1 - c.end1);
  t.p3 = endpoint(l2, 1 - c.end2);
  const Vector3 a = t.p2 - t.p1;
  const Vector3 b = t.p3 - t.p1;
  if (!(a.norm() > 0.0 && b.norm() > 0.0 && t.p1.norm() > 0.0)) {
    throw PoseError("degenerate corner triplet");
  }
  t.d1 = a.normalized();
  t.d2 = b.normalized();
  t.t = -t.p1 / t.p1.norm();
  const Vector3 d = t.d1.cross(t.d2);
  if (!(d.norm() > 1e-9)) throw PoseError("segments are parallel");
  t.d = d / d.norm();
  return t;
}

DimLabel classify_edge_dimension(double length, const CuboidDims& dims, double rel_tol) {
  int matches = 0;
  DimLabel label = DimLabel::kAmbiguous;
  for (Axis a : {Axis::kLength, Axis::kBreadth, Axis::kHeight}) {
    const double dim = dims.along(a);
    if (std::abs(length - dim) <= rel_tol * dim) {
      ++matches;
      label = static_cast<DimLabel>(static_cast<int>(a));
    }
  }
  return matches == 1 ? label : DimLabel::kAmbiguous;
}

std::optional<std::pair<Axis, Axis>> resolve_labels(double len1, double len2,
                                                    const CuboidDims& dims, double rel_tol) {
  auto candidates = [&](double len) {
    std::vector<Axis> out;
    for (Axis a : {Axis::kLength, Axis::kBreadth, Axis::kHeight}) {
      const double dim = dims.along(a);
      if (std::abs(len - dim) <= rel_tol * dim) out.push_back(a);
    }
    // Several matches are only resolvable when they are the same dimension.
    for (Axis a : out) {
      if (!same_dim(dims.along(a), dims.along(out.front()))) return std::vector<Axis>{};
    }
    return out;
  };
  const auto c1 = candidates(len1);
  const auto c2 = candidates(len2);
  if (c1.empty() || c2.empty()) return std::nullopt;
  const Axis a1 = c1.front();
  for (Axis a2 : c2) {
    if (a2 != a1) return std::make_pair(a1, a2);
  }
  return std::nullopt;
}

CorrespondenceSet assign_directions(const CornerTriplet& triplet, Axis label1, Axis label2,
                                    const CuboidDims& dims, double grazing_cos, bool far_face) {
  if (label1 == label2) throw PoseError("edge labels must differ");
  const int a1 = static_cast<int>(label1);
  const int a2 = static_cast<int>(label2);
  const int a3 = 3 - a1 - a2;
  // e_a1 x e_a2 = +e_a3 for cyclic (a1, a2), -e_a3 otherwise.
  const int handed = ((a1 + 1) % 3 == a2) ? 1 : -1;

  const double view = triplet.d.dot(triplet.t);
  if (std::abs(view) < grazing_cos) throw PoseError("grazing view: |d . t| too small");

  CorrespondenceSet out;
  out.sign1 = 1;
  out.sign2 = handed * (view > 0.0 ? 1 : -1);
  // R e_a3 = R(e_a1 x e_a2) * handed = handed * sign2 * d
  out.remaining_axis = (handed * out.sign2) * triplet.d;

  const Vector3 half = dims.half_extents();
  Point3 p1_local;
  p1_local[a1] = -out.sign1 * half[a1];
  p1_local[a2] = -out.sign2 * half[a2];
  p1_local[a3] = far_face ? -half[a3] : half[a3];
  Vector3 axis1 = Vector3::Zero();
  Vector3 axis2 = Vector3::Zero();
  axis1[a1] = out.sign1;
  axis2[a2] = out.sign2;
  const double len1 = (triplet.p2 - triplet.p1).norm();
  const double len2 = (triplet.p3 - triplet.p1).norm();

  out.pairs = {
      {triplet.p1, p1_local},
      {triplet.p2, p1_local + len1 * axis1},
      {triplet.p3, p1_local + len2 * axis2},
  };
  return out;
}

Pose pose_from_correspondences(std::span<const Correspondence> pairs) {
  if (pairs.size() < 3) throw PoseError("pose needs at least three correspondences");
  Vector3 mean_local = Vector3::Zero();
  Vector3 mean_cam = Vector3::Zero();
  for (const auto& c : pairs) {
    mean_local += c.local;
    mean_cam += c.camera;
  }
  mean_local /= static_cast<double>(pairs.size());
  mean_cam /= static_cast<double>(pairs.size());

  Matrix3 cross = Matrix3::Zero();
  Matrix3 spread = Matrix3::Zero();
  for (const auto& c : pairs) {
    const Vector3 l = c.local - mean_local;
    cross.noalias() += l * (c.camera - mean_cam).transpose();
    spread.noalias() += l * l.transpose();
  }
  const Eigen::JacobiSVD<Matrix3> spread_svd(spread);
  const Vector3 sv = spread_svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) {
    throw PoseError("correspondences are collinear");
  }

  const Eigen::JacobiSVD<Matrix3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3 u = svd.matrixU();
  const Matrix3 v = svd.matrixV();
  Matrix3 fix = Matrix3::Identity();
  fix(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Pose pose;
  pose.rotation = v * fix * u.transpose();
  pose.translation = mean_cam - pose.rotation * mean_local;
  return pose;
}

namespace {

double mean_residual(const Pose& pose, std::span<const Correspondence> pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : pairs) sum += (pose.apply(c.local) - c.camera).norm();
  return sum / static_cast<double>(pairs.size());
}

}  // namespace

RefineResult refine_pose(const Pose& initial, const CorrespondenceSet& initial_pairs,
                         const EdgeGroup& group, const CuboidDims& dims, double gate) {
  constexpr double kSame = 1e-9;
  const auto model = dims.corners();

  std::array<bool, 8> used{};
  for (std::size_t k = 0; k < model.size(); ++k) {
    for (const auto& c : initial_pairs.pairs) {
      if ((c.local - model[k]).norm() <= kSame) used[k] = true;
    }
  }
  std::vector<Point3> detected;
  for (const auto& corner : group.corners) {
    const bool known = std::any_of(initial_pairs.pairs.begin(), initial_pairs.pairs.end(),
                                   [&](const Correspondence& c) {
                                     return (c.camera - corner).norm() <= kSame;
                                   });
    if (!known) detected.push_back(corner);
  }

  struct Match {
    double distance;
    std::size_t detected;
    std::size_t model;
  };
  std::vector<Match> options;
  for (std::size_t i = 0; i < detected.size(); ++i) {
    for (std::size_t k = 0; k < model.size(); ++k) {
      if (used[k]) continue;
      const double d = (initial.apply(model[k]) - detected[i]).norm();
      if (d <= gate) options.push_back({d, i, k});
    }
  }
  std::sort(options.begin(), options.end(), [](const Match& a, const Match& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.detected != b.detected) return a.detected < b.detected;
    return a.model < b.model;
  });

  RefineResult out;
  out.pairs = initial_pairs.pairs;
  std::vector<bool> taken(detected.size(), false);
  for (const auto& m : options) {
    if (taken[m.detected] || used[m.model]) continue;
    taken[m.detected] = true;
    used[m.model] = true;
    out.pairs.push_back({detected[m.detected], model[m.model]});
    ++out.new_matches;
  }

  out.pose = out.new_matches == 0 ? initial : pose_from_correspondences(out.pairs);
  out.mean_residual = mean_residual(out.pose, out.pairs);
  return out;
}

namespace {

// Proper rotations that map the box onto itself.
std::vector<Matrix3> symmetry_group(const CuboidDims& dims) {
  std::vector<Matrix3> out;
  const std::array<int, 3> perm_init{0, 1, 2};
  std::array<int, 3> perm = perm_init;
  const Vector3 ext(dims.length, dims.breadth, dims.height);
  do {
    for (int signs = 0; signs < 8; ++signs) {
      Matrix3 m = Matrix3::Zero();
      bool ok = true;
      for (int r = 0; r < 3; ++r) {
        m(r, perm[r]) = (signs >> r) & 1 ? -1.0 : 1.0;
        if (!same_dim(ext[r], ext[perm[r]])) ok = false;
      }
      if (ok && m.determinant() > 0.0) out.push_back(m);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace

double rotation_error_mod_symmetry(const Matrix3& estimate, const Matrix3& truth,
                                   const CuboidDims& dims) {
  double best = std::numeric_limits<double>::infinity();
  for (const Matrix3& g : symmetry_group(dims)) {
    const Matrix3 rel = estimate.transpose() * truth * g;
    // acos of the trace loses half the digits near zero; the quaternion form
    // does not.
    const Eigen::Quaterniond q(rel);
    best = std::min(best, 2.0 * std::atan2(q.vec().norm(), std::abs(q.w())));
  }
  return best;
}

}  // namespace edgepose
