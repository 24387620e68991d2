#pragma once

#include <cstddef>
#include <vector>

#include "edgepose/point_cloud.hpp"
#include "edgepose/spatial_index.hpp"

namespace edgepose {

struct EdgeParams {
  double radius = 0.02;        // neighborhood radius, meters
  double threshold = 0.35;     // score threshold in [0, 1]
  std::size_t min_neighbors = 3;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Resultant magnitudes below this count as a cancelled resultant.
inline constexpr double kResultantEpsilon = 1e-12;

struct PointScore {
  double score = 0.0;
  std::size_t neighbors = 0;
};

/// Resultant-direction score of point `i`: the mean dot product between the
/// normalized resultant of the unit neighbor directions and each direction.
/// Points with fewer than `min_neighbors` neighbors, or whose resultant cancels,
/// score 0.
PointScore point_score(const SpatialIndex& index, std::size_t i, double radius,
                       std::size_t min_neighbors = 3);

struct ScoredCloud {
  std::vector<double> scores;
  std::vector<std::size_t> neighbor_counts;
  std::vector<bool> is_edge;
};

ScoredCloud score_cloud(const PointCloud& cloud, const EdgeParams& params);
ScoredCloud score_cloud(const SpatialIndex& index, const EdgeParams& params);

struct EdgeExtraction {
  PointCloud edges;
  std::vector<std::size_t> source_index;  // edges[i] came from cloud[source_index[i]]
  ScoredCloud scored;
};

/// Keeps the points whose edge flag is set. An empty input yields an empty result.
EdgeExtraction extract_edge_points(const PointCloud& cloud, const EdgeParams& params);

/// Surface variation lambda_min / (lambda_0 + lambda_1 + lambda_2) of the
/// covariance of each point's k nearest neighbors (the point included).
/// Requires k >= 3 and at least k points.
std::vector<double> covariance_edge_baseline(const SpatialIndex& index, std::size_t k);

}  // namespace edgepose
