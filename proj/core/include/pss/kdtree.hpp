#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace pss {

struct Neighbor {
  std::int32_t index = -1;
  double dist2 = std::numeric_limits<double>::infinity();

  bool operator<(const Neighbor& o) const { return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index); }
};

/// Static k-d tree over Dim-dimensional points.
///
/// Results match a brute-force scan exactly: ties in distance resolve to the
/// lower point index and radius queries return indices in ascending order.
template <int Dim>
class KdTree {
 public:
  using Point = Eigen::Matrix<double, Dim, 1>;

  KdTree() = default;

  explicit KdTree(std::vector<Point> points, int leaf_size = 12) : points_(std::move(points)), leaf_size_(leaf_size) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * points_.size() / std::max(1, leaf_size_) + 2);
    if (!points_.empty()) build(0, static_cast<std::int32_t>(points_.size()));
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point& point(std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const { return points_; }

  /// Nearest point accepted by `keep(index)`.
  template <class Pred>
  Neighbor nearest_if(const Point& q, Pred&& keep) const {
    Neighbor best;
    if (!nodes_.empty()) nearest_rec(0, q, keep, best);
    return best;
  }

  Neighbor nearest(const Point& q, std::int32_t exclude = -1) const {
    return nearest_if(q, [exclude](std::int32_t i) { return i != exclude; });
  }

  /// k nearest points sorted by (distance, index).
  std::vector<Neighbor> knn(const Point& q, std::size_t k, std::int32_t exclude = -1) const {
    std::vector<Neighbor> heap;
    if (k == 0 || nodes_.empty()) return heap;
    heap.reserve(k + 1);
    knn_rec(0, q, k, exclude, heap);
    std::sort_heap(heap.begin(), heap.end());
    return heap;
  }

  /// Indices of points with squared distance <= r^2, ascending.
  std::vector<std::int32_t> radius(const Point& q, double r) const {
    std::vector<std::int32_t> out;
    for_each_in_radius(q, r, [&](std::int32_t i, double) { out.push_back(i); });
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Calls fn(index, dist2) for every point within r (unordered).
  template <class Fn>
  void for_each_in_radius(const Point& q, double r, Fn&& fn) const {
    if (nodes_.empty() || r < 0) return;
    radius_rec(0, q, r * r, fn);
  }

 private:
  struct Node {
    std::int32_t begin = 0, end = 0;  // range into order_
    std::int32_t left = -1, right = -1;
    Point lo, hi;  // bounding box
  };

  std::int32_t build(std::int32_t begin, std::int32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{});
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = points_[order_[begin]];
    node.hi = node.lo;
    for (std::int32_t i = begin + 1; i < end; ++i) {
      node.lo = node.lo.cwiseMin(points_[order_[i]]);
      node.hi = node.hi.cwiseMax(points_[order_[i]]);
    }
    if (end - begin > leaf_size_) {
      int axis = 0;
      (node.hi - node.lo).maxCoeff(&axis);
      const std::int32_t mid = begin + (end - begin) / 2;
      std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                       [&](std::int32_t a, std::int32_t b) {
                         const double pa = points_[a][axis], pb = points_[b][axis];
                         return pa < pb || (pa == pb && a < b);
                       });
      node.left = build(begin, mid);
      node.right = build(mid, end);
    }
    nodes_[id] = node;
    return id;
  }

  double box_dist2(const Node& n, const Point& q) const {
    double d = 0.0;
    for (int k = 0; k < Dim; ++k) {
      const double v = q[k] < n.lo[k] ? n.lo[k] - q[k] : (q[k] > n.hi[k] ? q[k] - n.hi[k] : 0.0);
      d += v * v;
    }
    return d;
  }

  template <class Pred>
  void nearest_rec(std::int32_t id, const Point& q, Pred& keep, Neighbor& best) const {
    const Node& n = nodes_[id];
    if (box_dist2(n, q) > best.dist2) return;
    if (n.left < 0) {
      for (std::int32_t i = n.begin; i < n.end; ++i) {
        const std::int32_t p = order_[i];
        const Neighbor cand{p, (points_[p] - q).squaredNorm()};
        if (cand < best && keep(p)) best = cand;
      }
      return;
    }
    const double dl = box_dist2(nodes_[n.left], q);
    const double dr = box_dist2(nodes_[n.right], q);
    if (dl <= dr) {
      nearest_rec(n.left, q, keep, best);
      nearest_rec(n.right, q, keep, best);
    } else {
      nearest_rec(n.right, q, keep, best);
      nearest_rec(n.left, q, keep, best);
    }
  }

  void knn_rec(std::int32_t id, const Point& q, std::size_t k, std::int32_t exclude,
               std::vector<Neighbor>& heap) const {
    const Node& n = nodes_[id];
    if (heap.size() == k && box_dist2(n, q) > heap.front().dist2) return;
    if (n.left < 0) {
      for (std::int32_t i = n.begin; i < n.end; ++i) {
        const std::int32_t p = order_[i];
        if (p == exclude) continue;
        const Neighbor cand{p, (points_[p] - q).squaredNorm()};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double dl = box_dist2(nodes_[n.left], q);
    const double dr = box_dist2(nodes_[n.right], q);
    if (dl <= dr) {
      knn_rec(n.left, q, k, exclude, heap);
      knn_rec(n.right, q, k, exclude, heap);
    } else {
      knn_rec(n.right, q, k, exclude, heap);
      knn_rec(n.left, q, k, exclude, heap);
    }
  }

  template <class Fn>
  void radius_rec(std::int32_t id, const Point& q, double r2, Fn& fn) const {
    const Node& n = nodes_[id];
    if (box_dist2(n, q) > r2) return;
    if (n.left < 0) {
      for (std::int32_t i = n.begin; i < n.end; ++i) {
        const std::int32_t p = order_[i];
        const double d2 = (points_[p] - q).squaredNorm();
        if (d2 <= r2) fn(p, d2);
      }
      return;
    }
    radius_rec(n.left, q, r2, fn);
    radius_rec(n.right, q, r2, fn);
  }

  std::vector<Point> points_;
  std::vector<std::int32_t> order_;
  std::vector<Node> nodes_;
  int leaf_size_ = 12;
};

using KdTree3 = KdTree<3>;
using KdTree2 = KdTree<2>;

/// 2D range-minimum structure: minimum of a per-point value over the points
/// whose xy lies within a radius of a query. Used for cylinder elevation
/// queries, where plain radius enumeration would visit thousands of points.
class CylinderMinIndex {
 public:
  CylinderMinIndex() = default;
  CylinderMinIndex(std::vector<Eigen::Vector2d> xy, std::vector<double> values);

  /// Minimum value within radius r of q; +inf when no point is in range.
  double min_within(const Eigen::Vector2d& q, double r) const;

 private:
  struct Node {
    std::int32_t begin = 0, end = 0, left = -1, right = -1;
    Eigen::Vector2d lo, hi;
    double min_value = 0.0;
  };
  std::int32_t build(std::int32_t begin, std::int32_t end);
  void query(std::int32_t id, const Eigen::Vector2d& q, double r2, double& best) const;

  std::vector<Eigen::Vector2d> xy_;
  std::vector<double> values_;
  std::vector<std::int32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace pss
