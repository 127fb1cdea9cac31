#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "egotraj/geom.hpp"

namespace egotraj {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

// Static k-d tree over 3D points: median splits along the widest axis,
// leaves of at most 16 points. Nearest-neighbor ties resolve to the smallest
// point index, which makes results identical to a linear scan.
class KdTree {
 public:
  // Throws InvalidArgumentError for an empty or non-finite point set.
  explicit KdTree(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  Neighbor nearest(const Vec3& query) const;
  // Indices of all points within `radius` (inclusive), ascending.
  std::vector<std::size_t> radius_search(const Vec3& query, double radius) const;

 private:
  static constexpr std::size_t kLeafSize = 16;

  struct Node {
    // Leaf when left < 0: points order_[begin, end).
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void nearest_in(std::int32_t node, const Vec3& q, std::size_t& best, double& best_d2) const;
  void radius_in(std::int32_t node, const Vec3& q, double r2, std::vector<std::size_t>& out) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace egotraj
