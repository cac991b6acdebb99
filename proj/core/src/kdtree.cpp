#include "pss/kdtree.hpp"

#include <cmath>

namespace pss {

CylinderMinIndex::CylinderMinIndex(std::vector<Eigen::Vector2d> xy, std::vector<double> values)
    : xy_(std::move(xy)), values_(std::move(values)) {
  order_.resize(xy_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!xy_.empty()) build(0, static_cast<std::int32_t>(xy_.size()));
}

std::int32_t CylinderMinIndex::build(std::int32_t begin, std::int32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{});
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = node.hi = xy_[order_[begin]];
  node.min_value = values_[order_[begin]];
  for (std::int32_t i = begin + 1; i < end; ++i) {
    node.lo = node.lo.cwiseMin(xy_[order_[i]]);
    node.hi = node.hi.cwiseMax(xy_[order_[i]]);
    node.min_value = std::min(node.min_value, values_[order_[i]]);
  }
  if (end - begin > 8) {
    const int axis = (node.hi - node.lo).x() >= (node.hi - node.lo).y() ? 0 : 1;
    const std::int32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::int32_t a, std::int32_t b) { return xy_[a][axis] < xy_[b][axis]; });
    node.left = build(begin, mid);
    node.right = build(mid, end);
  }
  nodes_[id] = node;
  return id;
}

void CylinderMinIndex::query(std::int32_t id, const Eigen::Vector2d& q, double r2, double& best) const {
  const Node& n = nodes_[id];
  if (n.min_value >= best) return;
  // Nearest and farthest box distances decide prune / take-whole-node.
  double near2 = 0.0, far2 = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double a = n.lo[k] - q[k], b = q[k] - n.hi[k];
    const double d = std::max({a, b, 0.0});
    near2 += d * d;
    const double f = std::max(std::abs(q[k] - n.lo[k]), std::abs(q[k] - n.hi[k]));
    far2 += f * f;
  }
  if (near2 > r2) return;
  if (far2 <= r2) {
    best = std::min(best, n.min_value);
    return;
  }
  if (n.left < 0) {
    for (std::int32_t i = n.begin; i < n.end; ++i) {
      const auto p = order_[i];
      if ((xy_[p] - q).squaredNorm() <= r2) best = std::min(best, values_[p]);
    }
    return;
  }
  query(n.left, q, r2, best);
  query(n.right, q, r2, best);
}

double CylinderMinIndex::min_within(const Eigen::Vector2d& q, double r) const {
  double best = std::numeric_limits<double>::infinity();
  if (!nodes_.empty()) query(0, q, r * r, best);
  return best;
}

}  // namespace pss
