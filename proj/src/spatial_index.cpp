#include "edgepose/spatial_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <utility>

namespace edgepose {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

SpatialIndex::SpatialIndex(const PointCloud& cloud) : cloud_(&cloud) {
  if (cloud.empty()) throw std::invalid_argument("cannot index an empty cloud");
  if (cloud.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("cloud too large to index");
  }
  order_.resize(cloud.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * cloud.size() / kLeafSize + 1);
  root_ = build(0, static_cast<std::uint32_t>(order_.size()), 0);
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end, unsigned depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  const auto axis = static_cast<std::uint8_t>(depth % 3);
  const std::uint32_t mid = begin + (end - begin) / 2;
  const auto& pts = cloud_->points;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = pts[a][axis], cb = pts[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = pts[order_[mid]][axis];
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

template <typename Visit>
void SpatialIndex::visit_ball(const Point3& q, double radius, Visit&& visit) const {
  const double r2 = radius * radius;
  const auto& pts = cloud_->points;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.left < 0) {
      for (std::uint32_t k = node.begin; k < node.end; ++k) {
        const std::uint32_t i = order_[k];
        if ((pts[i] - q).squaredNorm() <= r2) visit(i);
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    if (diff - radius <= 0.0) stack[top++] = node.left;
    if (diff + radius >= 0.0) stack[top++] = node.right;
  }
}

std::vector<std::size_t> SpatialIndex::radius_neighbors(const Point3& query,
                                                        double radius) const {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  std::vector<std::size_t> out;
  visit_ball(query, radius, [&](std::uint32_t i) { out.push_back(i); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> SpatialIndex::radius_neighbors(std::size_t index,
                                                        double radius) const {
  if (index >= size()) throw std::out_of_range("point index out of range");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  std::vector<std::size_t> out;
  visit_ball(cloud_->points[index], radius, [&](std::uint32_t i) {
    if (i != index) out.push_back(i);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t SpatialIndex::count_neighbors(std::size_t index, double radius) const {
  if (index >= size()) throw std::out_of_range("point index out of range");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  std::size_t n = 0;
  visit_ball(cloud_->points[index], radius, [&](std::uint32_t i) { n += (i != index); });
  return n;
}

std::vector<std::size_t> SpatialIndex::nearest(const Point3& query, std::size_t k) const {
  if (k == 0) return {};
  k = std::min(k, size());
  using Entry = std::pair<double, std::uint32_t>;  // max-heap on (dist2, index)
  std::priority_queue<Entry> best;
  const auto& pts = cloud_->points;

  auto worst = [&]() {
    return best.size() < k ? std::numeric_limits<double>::infinity() : best.top().first;
  };

  std::int32_t stack[128];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.left < 0) {
      for (std::uint32_t j = node.begin; j < node.end; ++j) {
        const std::uint32_t i = order_[j];
        const Entry e{(pts[i] - query).squaredNorm(), i};
        if (best.size() < k) {
          best.push(e);
        } else if (e < best.top()) {
          best.pop();
          best.push(e);
        }
      }
      continue;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    // Push far first so near is explored first; far is re-checked lazily below.
    if (diff * diff <= worst()) stack[top++] = far;
    stack[top++] = near;
  }

  std::vector<std::size_t> out(best.size());
  for (std::size_t i = best.size(); i-- > 0;) {
    out[i] = best.top().second;
    best.pop();
  }
  return out;
}

}  // namespace edgepose
