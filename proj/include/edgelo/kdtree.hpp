#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edgelo/geometry.hpp"

namespace edgelo {

struct Neighbor {
  std::uint32_t index = 0;  // into the point array the tree was built on
  double squared_distance = 0.0;
};

/// Squared Euclidean distance, shared by the tree and brute-force checks so
/// both see identical rounding.
inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

/// Static 3-d tree over a point array it owns. Exact k-nearest-neighbour
/// search; results are ordered by (squared distance, index) so ties resolve
/// to the earlier-inserted point.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Point3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Point3>& points() const { return points_; }

  std::vector<Neighbor> knn(const Point3& query, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin = 0;  // range in order_
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;            // -1 for leaves
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3& query, std::size_t k,
              std::vector<Neighbor>& heap) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace edgelo
