#include "edgepose/edge_detect.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace edgepose {

void EdgeParams::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("edge radius must be positive");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("edge threshold must lie in [0, 1]");
  }
  if (min_neighbors < 1) throw std::invalid_argument("min_neighbors must be at least 1");
}

PointScore point_score(const SpatialIndex& index, std::size_t i, double radius,
                       std::size_t min_neighbors) {
  const auto neighbors = index.radius_neighbors(i, radius);
  const auto& pts = index.cloud().points;
  const Point3& p = pts[i];

  PointScore out;
  out.neighbors = neighbors.size();
  if (neighbors.size() < min_neighbors || neighbors.empty()) return out;

  std::vector<Vector3> dirs;
  dirs.reserve(neighbors.size());
  Vector3 resultant = Vector3::Zero();
  for (std::size_t j : neighbors) {
    const Vector3 d = pts[j] - p;
    const double n = d.norm();
    // Coincident duplicates carry no direction.
    const Vector3 u = n > 0.0 ? Vector3(d / n) : Vector3::Zero();
    dirs.push_back(u);
    resultant += u;
  }
  const double rn = resultant.norm();
  if (rn < kResultantEpsilon) return out;
  const Vector3 unit_resultant = resultant / rn;

  double sum = 0.0;
  for (const auto& u : dirs) sum += unit_resultant.dot(u);
  out.score = std::clamp(sum / static_cast<double>(neighbors.size()), 0.0, 1.0);
  return out;
}

ScoredCloud score_cloud(const SpatialIndex& index, const EdgeParams& params) {
  params.validate();
  const std::size_t n = index.size();
  ScoredCloud out;
  out.scores.resize(n);
  out.neighbor_counts.resize(n);
  out.is_edge.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PointScore s = point_score(index, i, params.radius, params.min_neighbors);
    out.scores[i] = s.score;
    out.neighbor_counts[i] = s.neighbors;
    out.is_edge[i] = s.score > params.threshold && s.neighbors >= params.min_neighbors;
  }
  return out;
}

ScoredCloud score_cloud(const PointCloud& cloud, const EdgeParams& params) {
  params.validate();
  if (cloud.empty()) return {};
  const SpatialIndex index(cloud);
  return score_cloud(index, params);
}

EdgeExtraction extract_edge_points(const PointCloud& cloud, const EdgeParams& params) {
  EdgeExtraction out;
  out.scored = score_cloud(cloud, params);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!out.scored.is_edge[i]) continue;
    out.edges.push_back(cloud[i]);
    out.source_index.push_back(i);
  }
  return out;
}

std::vector<double> covariance_edge_baseline(const SpatialIndex& index, std::size_t k) {
  if (k < 3) throw std::invalid_argument("covariance baseline needs k >= 3");
  if (index.size() < k) {
    throw std::invalid_argument("cloud has " + std::to_string(index.size()) +
                                " points, fewer than k = " + std::to_string(k));
  }
  const auto& pts = index.cloud().points;
  std::vector<double> out(index.size(), 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix3> solver;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto nn = index.nearest(pts[i], k);
    Vector3 mean = Vector3::Zero();
    for (std::size_t j : nn) mean += pts[j];
    mean /= static_cast<double>(nn.size());
    Matrix3 cov = Matrix3::Zero();
    for (std::size_t j : nn) {
      const Vector3 d = pts[j] - mean;
      cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(nn.size());
    solver.compute(cov, Eigen::EigenvaluesOnly);
    // Ascending order; round-off can push a zero eigenvalue slightly negative.
    const Vector3 ev = solver.eigenvalues().cwiseMax(0.0);
    const double total = ev.sum();
    out[i] = total > 0.0 ? ev[0] / total : 0.0;
  }
  return out;
}

}  // namespace edgepose
