#include "woundbench/spatial_index.hpp"

#include "woundbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace woundbench {

PointIndex::PointIndex(std::vector<Vec3> points) : points_(std::move(points)) {
  std::vector<std::uint32_t> ids(points_.size());
  std::iota(ids.begin(), ids.end(), 0u);
  nodes_.reserve(points_.size());
  root_ = build(ids.data(), ids.data() + ids.size(), 0);
}

std::int32_t PointIndex::build(std::uint32_t* begin, std::uint32_t* end, int depth) {
  if (begin == end) {
    return -1;
  }
  const auto axis = static_cast<std::uint8_t>(depth % 3);
  std::uint32_t* mid = begin + (end - begin) / 2;
  std::nth_element(begin, mid, end, [&](std::uint32_t l, std::uint32_t r) {
    if (points_[l][axis] != points_[r][axis]) {
      return points_[l][axis] < points_[r][axis];
    }
    return l < r;
  });
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({*mid, -1, -1, axis});
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid + 1, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void PointIndex::nearest_rec(std::int32_t node, const Vec3& q, Neighbor& best, double& best_d2) const {
  if (node < 0) {
    return;
  }
  const Node& n = nodes_[node];
  const Vec3& p = points_[n.point];
  const double d2 = (p - q).squaredNorm();
  if (d2 < best_d2 || (d2 == best_d2 && n.point < best.index)) {
    best_d2 = d2;
    best.index = n.point;
  }
  const double diff = q[n.axis] - p[n.axis];
  const std::int32_t near_side = diff < 0.0 ? n.left : n.right;
  const std::int32_t far_side = diff < 0.0 ? n.right : n.left;
  nearest_rec(near_side, q, best, best_d2);
  if (diff * diff <= best_d2) {
    nearest_rec(far_side, q, best, best_d2);
  }
}

PointIndex::Neighbor PointIndex::nearest(const Vec3& query) const {
  if (points_.empty()) {
    throw input_error("empty point set");
  }
  Neighbor best{std::numeric_limits<std::size_t>::max(), 0.0};
  double best_d2 = std::numeric_limits<double>::infinity();
  nearest_rec(root_, query, best, best_d2);
  best.distance = std::sqrt(best_d2);
  return best;
}

bool PointIndex::any_within(const Vec3& query, double radius) const {
  if (points_.empty()) {
    return false;
  }
  return nearest(query).distance <= radius;
}

} // namespace woundbench
