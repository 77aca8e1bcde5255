#include "woundbench/spatial_index.hpp"

#include "woundbench/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace woundbench {

TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    return {a, (p - a).squaredNorm(), TriangleFeature::vertex0};
  }

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    return {b, (p - b).squaredNorm(), TriangleFeature::vertex1};
  }

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    const Vec3 q = a + v * ab;
    return {q, (p - q).squaredNorm(), TriangleFeature::edge01};
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    return {c, (p - c).squaredNorm(), TriangleFeature::vertex2};
  }

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    const Vec3 q = a + w * ac;
    return {q, (p - q).squaredNorm(), TriangleFeature::edge20};
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    const Vec3 q = b + w * (c - b);
    return {q, (p - q).squaredNorm(), TriangleFeature::edge12};
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  const Vec3 q = a + ab * v + ac * w;
  // plane offset is exactly zero for points lying in the plane
  const Vec3 n = ab.cross(ac);
  const double h = ap.dot(n);
  return {q, h * h / n.squaredNorm(), TriangleFeature::interior};
}

namespace {

constexpr std::uint32_t kLeafSize = 4;

double box_squared_distance(const Vec3& q, const Vec3& lo, const Vec3& hi) {
  const Vec3 d = (lo - q).cwiseMax(Vec3::Zero()).cwiseMax(q - hi);
  return d.squaredNorm();
}

} // namespace

SpatialIndex::SpatialIndex(const TriangleMesh& mesh) : mesh_(mesh) {
  if (mesh_.empty()) {
    throw input_error("empty mesh");
  }
  const std::size_t nf = mesh_.face_count();
  normals_.reserve(nf);
  std::vector<Vec3> centroids(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    normals_.push_back(mesh_.face_normal(f));
    centroids[f] = mesh_.face_centroid(f);
  }
  order_.resize(nf);
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * nf / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(nf), centroids);
  const BoundingBox box = mesh_.bounds();
  tie_tolerance_ = 1e-10 * std::max({1.0, box.min.cwiseAbs().maxCoeff(), box.max.cwiseAbs().maxCoeff()});
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
  const auto node_id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});

  BoundingBox box;
  BoundingBox centroid_box;
  const auto& v = mesh_.vertices();
  for (std::uint32_t i = begin; i < end; ++i) {
    const Face& f = mesh_.faces()[order_[i]];
    for (std::uint32_t idx : f) {
      box.extend(v[idx]);
    }
    centroid_box.extend(centroids[order_[i]]);
  }

  if (end - begin <= kLeafSize) {
    nodes_[node_id] = {box.min, box.max, begin, end - begin, 0};
    return node_id;
  }

  int axis = 0;
  (centroid_box.max - centroid_box.min).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(
      order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
      [&](std::uint32_t l, std::uint32_t r) {
        if (centroids[l][axis] != centroids[r][axis]) {
          return centroids[l][axis] < centroids[r][axis];
        }
        return l < r;
      });

  const std::uint32_t left = build(begin, mid, centroids);
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[node_id] = {box.min, box.max, left, 0, right};
  return node_id;
}

template <typename Visit>
void SpatialIndex::traverse(const Vec3& query, const double& bound_d2, Visit&& visit) const {
  std::array<std::uint32_t, 128> stack{};
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    // equality is not pruned: an equidistant face with a lower index may still win
    if (box_squared_distance(query, node.lo, node.hi) > bound_d2) {
      continue;
    }
    if (node.count > 0) {
      for (std::uint32_t i = node.begin; i < node.begin + node.count; ++i) {
        visit(order_[i]);
      }
      continue;
    }
    const Node& l = nodes_[node.begin];
    const Node& r = nodes_[node.right];
    const double dl = box_squared_distance(query, l.lo, l.hi);
    const double dr = box_squared_distance(query, r.lo, r.hi);
    // push the farther child first so the nearer one is searched first
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.begin;
    } else {
      stack[top++] = node.begin;
      stack[top++] = node.right;
    }
  }
}

SurfaceHit SpatialIndex::nearest(const Vec3& query) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  std::uint32_t best_face = std::numeric_limits<std::uint32_t>::max();
  TrianglePoint best_point{};
  const auto& v = mesh_.vertices();

  traverse(query, best_d2, [&](std::uint32_t fi) {
    const Face& f = mesh_.faces()[fi];
    const TrianglePoint tp = closest_point_on_triangle(query, v[f[0]], v[f[1]], v[f[2]]);
    if (tp.squared_distance < best_d2 || (tp.squared_distance == best_d2 && fi < best_face)) {
      best_d2 = tp.squared_distance;
      best_face = fi;
      best_point = tp;
    }
  });

  // A foot on an edge or vertex is shared by several faces whose distances
  // differ only by round-off; the lowest index among them owns the hit so
  // the reported normal does not depend on the frame.
  std::uint32_t owner = best_face;
  if (best_point.feature != TriangleFeature::interior) {
    const double limit = std::sqrt(best_d2) + tie_tolerance_;
    const double limit_d2 = limit * limit;
    traverse(query, limit_d2, [&](std::uint32_t fi) {
      if (fi >= owner) {
        return;
      }
      const Face& f = mesh_.faces()[fi];
      if (closest_point_on_triangle(query, v[f[0]], v[f[1]], v[f[2]]).squared_distance <= limit_d2) {
        owner = fi;
      }
    });
  }
  if (owner != best_face) {
    const Face& f = mesh_.faces()[owner];
    best_point = closest_point_on_triangle(query, v[f[0]], v[f[1]], v[f[2]]);
  }
  return {best_point.point, std::sqrt(best_d2), owner, normals_[owner], best_point.feature};
}

SurfaceHit nearest_on_surface(const SpatialIndex& index, const Vec3& query) {
  return index.nearest(query);
}

} // namespace woundbench
