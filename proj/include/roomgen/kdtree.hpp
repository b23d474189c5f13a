#pragma once

#include "roomgen/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace roomgen {

/// Static 3-d tree over a point set for exact nearest-neighbor queries.
/// The tree keeps a reference to nothing; points are copied in tree order.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    points_.assign(points.begin(), points.end());
    if (!points.empty()) build(0, points.size());
  }

  struct Neighbor {
    std::size_t index = 0;  // index into the original point span
    double distance2 = std::numeric_limits<double>::infinity();
  };

  /// Exact nearest neighbor; ties resolve to the smallest original index.
  Neighbor nearest(const Vec3& q) const {
    Neighbor best;
    if (nodes_.empty()) return best;
    search(0, q, best);
    return best;
  }

  std::size_t size() const { return points_.size(); }

 private:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    std::size_t begin = 0, end = 0;
    std::uint32_t left = 0, right = 0;  // 0 = leaf
    int axis = 0;
    double split = 0.0;
  };

  std::uint32_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;

    Aabb box;
    for (std::size_t i = begin; i < end; ++i) box.extend(points_[order_[i]]);
    int axis = 0;
    box.extent().maxCoeff(&axis);
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    const double split = points_[order_[mid]][axis];
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    auto& n = nodes_[id];
    n.axis = axis;
    n.split = split;
    n.left = left;
    n.right = right;
    return id;
  }

  void search(std::uint32_t id, const Vec3& q, Neighbor& best) const {
    const Node& n = nodes_[id];
    if (n.left == 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const std::size_t idx = order_[i];
        const double d2 = distance2(points_[idx], q);
        if (d2 < best.distance2 || (d2 == best.distance2 && idx < best.index))
          best = {idx, d2};
      }
      return;
    }
    const double delta = q[n.axis] - n.split;
    const auto near = delta < 0 ? n.left : n.right;
    const auto far = delta < 0 ? n.right : n.left;
    search(near, q, best);
    // Points on the far side are at least |delta| away along the split axis.
    if (delta * delta <= best.distance2) search(far, q, best);
  }

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace roomgen
