#include "edgepose/line_extract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "edgepose/random.hpp"
#include "edgepose/spatial_index.hpp"

namespace edgepose {

void ExtractParams::validate() const {
  if (!(distance_threshold > 0.0)) throw std::invalid_argument("RANSAC threshold must be positive");
  if (min_inliers < 2) throw std::invalid_argument("min_inliers must be at least 2");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (!(radius > 0.0)) throw std::invalid_argument("segment radius must be positive");
}

std::size_t ExtractParams::effective_min_inliers(std::size_t edge_count) const {
  if (!scale_min_inliers) return min_inliers;
  const std::size_t scaled = std::max<std::size_t>(10, (edge_count + 99) / 100);
  return std::max<std::size_t>(2, std::min(min_inliers, scaled));
}

std::optional<RansacLine> ransac_line(std::span<const Point3> points,
                                      const ExtractParams& params, std::uint64_t seed) {
  params.validate();
  if (points.size() < 2) throw std::invalid_argument("RANSAC needs at least two points");

  Rng rng(seed);
  const double thr = params.distance_threshold;
  std::size_t best_count = 0;
  LineModel best;
  bool found = false;

  for (std::size_t it = 0; it < params.max_iterations; ++it) {
    const std::size_t a = rng.below(points.size());
    std::size_t b = rng.below(points.size() - 1);
    if (b >= a) ++b;
    const Vector3 d = points[b] - points[a];
    const double n = d.norm();
    if (n == 0.0) continue;
    const LineModel model{points[a], d / n};
    std::size_t count = 0;
    for (const auto& p : points) count += model.distance(p) <= thr;
    if (count > best_count) {
      best_count = count;
      best = model;
      found = true;
    }
  }
  if (!found || best_count < params.min_inliers) return std::nullopt;

  RansacLine out{best, {}};
  out.inliers.reserve(best_count);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (best.distance(points[i]) <= thr) out.inliers.push_back(i);
  }
  return out;
}

namespace {

PointCloud to_cloud(std::span<const Point3> pts) {
  PointCloud c;
  c.points.assign(pts.begin(), pts.end());
  return c;
}

// Reference search limited to `eligible` points; neighbor counts still use
// every point.
std::optional<std::size_t> reference_among(const SpatialIndex& index, double radius,
                                           const std::vector<bool>& eligible) {
  std::optional<std::size_t> best;
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (!eligible[i]) continue;
    const std::size_t c = index.count_neighbors(i, radius);
    if (!best || c > best_count) {
      best = i;
      best_count = c;
    }
  }
  return best;
}

}  // namespace

std::size_t reference_index(std::span<const Point3> inliers, double radius) {
  if (inliers.empty()) throw std::invalid_argument("reference_index needs a nonempty set");
  const PointCloud cloud = to_cloud(inliers);
  const SpatialIndex index(cloud);
  return *reference_among(index, radius, std::vector<bool>(cloud.size(), true));
}

namespace {

std::optional<Extremes> extremes_with_index(const SpatialIndex& index, std::size_t reference,
                                            double radius) {
  const auto& pts = index.cloud().points;
  struct Candidate {
    std::size_t index;
    Vector3 to_reference;  // unit
    double distance;
  };
  std::vector<Candidate> candidates;
  const Point3& pr = pts[reference];

  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == reference) continue;
    const Vector3 d1 = pr - pts[i];
    const double dist = d1.norm();
    if (dist == 0.0) continue;
    const Vector3 u1 = d1 / dist;
    bool extreme = true;
    for (std::size_t j : index.radius_neighbors(i, radius)) {
      const Vector3 d2 = pts[j] - pts[i];
      const double n2 = d2.norm();
      if (n2 == 0.0) continue;
      if (u1.dot(d2 / n2) < 0.0) {
        extreme = false;
        break;
      }
    }
    if (extreme) candidates.push_back({i, u1, dist});
  }
  if (candidates.empty()) return std::nullopt;

  // Candidates are in ascending index order, so strict comparison keeps the
  // lowest index on ties.
  const Candidate* e1 = &candidates.front();
  for (const auto& c : candidates) {
    if (c.distance < e1->distance) e1 = &c;
  }
  const Candidate* e2 = nullptr;
  for (const auto& c : candidates) {
    if (c.to_reference.dot(e1->to_reference) >= 0.0) continue;
    if (!e2 || c.distance < e2->distance) e2 = &c;
  }
  if (!e2) return Extremes{e1->index, reference, true};
  return Extremes{e1->index, e2->index, false};
}

// Principal-axis line through the points whose projection on e1->e2 lies
// between the two; nullopt with fewer than two such points.
std::optional<LineModel> fit_between(const std::vector<Point3>& pts, const Point3& e1,
                                     const Point3& e2) {
  const Vector3 axis = (e2 - e1).normalized();
  const double len = (e2 - e1).norm();
  Vector3 mean = Vector3::Zero();
  std::size_t n = 0;
  for (const auto& p : pts) {
    const double t = (p - e1).dot(axis);
    if (t < 0.0 || t > len) continue;
    mean += p;
    ++n;
  }
  if (n < 2) return std::nullopt;
  mean /= static_cast<double>(n);
  Matrix3 cov = Matrix3::Zero();
  for (const auto& p : pts) {
    const double t = (p - e1).dot(axis);
    if (t < 0.0 || t > len) continue;
    const Vector3 d = p - mean;
    cov.noalias() += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix3> solver(cov);
  Vector3 dir = solver.eigenvectors().col(2);
  if (dir.dot(axis) < 0.0) dir = -dir;
  return LineModel{mean, dir.normalized()};
}

}  // namespace

std::optional<Extremes> extreme_points(std::span<const Point3> inliers, std::size_t reference,
                                       double radius) {
  if (inliers.size() < 2) throw std::invalid_argument("extreme_points needs at least two points");
  if (reference >= inliers.size()) throw std::out_of_range("reference index out of range");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  const PointCloud cloud = to_cloud(inliers);
  const SpatialIndex index(cloud);
  return extremes_with_index(index, reference, radius);
}

std::vector<LineSegment> extract_all_segments(const PointCloud& edges,
                                              const ExtractParams& params,
                                              std::uint64_t seed) {
  params.validate();
  std::vector<LineSegment> out;
  if (edges.size() < 2) return out;

  ExtractParams run = params;
  run.min_inliers = params.effective_min_inliers(edges.size());
  const double thr = run.distance_threshold;

  std::vector<bool> alive(edges.size(), true);
  std::size_t alive_count = edges.size();
  Rng seeds(seed);

  while (out.size() < run.max_segments && alive_count >= std::max<std::size_t>(2, run.min_inliers)) {
    std::vector<std::size_t> working;
    working.reserve(alive_count);
    std::vector<Point3> working_pts;
    working_pts.reserve(alive_count);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (!alive[i]) continue;
      working.push_back(i);
      working_pts.push_back(edges[i]);
    }

    const auto fit = ransac_line(working_pts, run, seeds.next());
    if (!fit) break;

    auto discard_consensus = [&]() {
      for (std::size_t k : fit->inliers) {
        if (alive[working[k]]) {
          alive[working[k]] = false;
          --alive_count;
        }
      }
    };

    // Extremes are searched over every edge point near the line, including
    // points already claimed by earlier segments, so an edge keeps its corner
    // region after a crossing edge consumed it. The reference point must still
    // be unclaimed.
    std::vector<std::size_t> support;
    PointCloud support_cloud;
    std::vector<bool> eligible;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (fit->model.distance(edges[i]) > thr) continue;
      support.push_back(i);
      support_cloud.push_back(edges[i]);
      eligible.push_back(alive[i]);
    }
    const SpatialIndex support_index(support_cloud);
    const auto ref = reference_among(support_index, run.radius, eligible);
    const auto ext = ref ? extremes_with_index(support_index, *ref, run.radius) : std::nullopt;
    if (!ext) {
      discard_consensus();
      continue;
    }

    LineSegment seg;
    seg.e1 = support_cloud[ext->first];
    seg.e2 = support_cloud[ext->second];
    seg.one_sided = ext->one_sided;
    if (!(seg.length() > 0.0)) {
      discard_consensus();
      continue;
    }
    // The extremes sit anywhere across the width of the edge band; snap them
    // onto the least-squares line of the support between them.
    if (const auto fitted = fit_between(support_cloud.points, seg.e1, seg.e2)) {
      seg.e1 = fitted->point + fitted->project(seg.e1) * fitted->direction;
      seg.e2 = fitted->point + fitted->project(seg.e2) * fitted->direction;
      if (!(seg.length() > 0.0)) {
        discard_consensus();
        continue;
      }
    }
    const LineModel line = seg.line();
    const double lo = -run.radius;
    const double hi = seg.length() + run.radius;
    for (std::size_t i : working) {
      const Point3& p = edges[i];
      const double t = line.project(p);
      if (t >= lo && t <= hi && line.distance(p) <= thr) seg.members.push_back(i);
    }
    if (seg.members.size() < run.min_inliers) {
      discard_consensus();
      continue;
    }
    for (std::size_t i : seg.members) {
      alive[i] = false;
      --alive_count;
    }
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace edgepose
