#include "egotraj/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "egotraj/errors.hpp"

namespace egotraj {

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) {
    throw InvalidArgumentError("synthdb", "cannot index an empty point cloud");
  }
  if (points_.size() > std::numeric_limits<std::uint32_t>::max() / 2) {
    throw InvalidArgumentError("synthdb", "point cloud too large to index");
  }
  for (const Vec3& p : points_) {
    if (!p.allFinite()) {
      throw InvalidArgumentError("synthdb", "point cloud contains non-finite coordinates");
    }
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0U);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) {
    return id;
  }

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) {
    return id;  // all points coincide
  }

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis];
                     const double cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree::nearest_in(std::int32_t id, const Vec3& q, std::size_t& best, double& best_d2) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
        best_d2 = d2;
        best = idx;
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  nearest_in(near, q, best, best_d2);
  // Equal distance is still explored so a smaller tied index can win.
  if (diff * diff <= best_d2) {
    nearest_in(far, q, best, best_d2);
  }
}

Neighbor KdTree::nearest(const Vec3& query) const {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  nearest_in(0, query, best, best_d2);
  return {best, std::sqrt(best_d2)};
}

void KdTree::radius_in(std::int32_t id, const Vec3& q, double r2, std::vector<std::size_t>& out) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      if ((points_[order_[i]] - q).squaredNorm() <= r2) {
        out.push_back(order_[i]);
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  if (diff <= 0.0 || diff * diff <= r2) {
    radius_in(node.left, q, r2, out);
  }
  if (diff >= 0.0 || diff * diff <= r2) {
    radius_in(node.right, q, r2, out);
  }
}

std::vector<std::size_t> KdTree::radius_search(const Vec3& query, double radius) const {
  std::vector<std::size_t> out;
  if (!(radius >= 0.0)) {
    throw InvalidArgumentError("synthdb", "search radius must be non-negative");
  }
  radius_in(0, query, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace egotraj
