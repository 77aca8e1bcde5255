#pragma once

#include "woundbench/mesh.hpp"

#include <cstdint>
#include <vector>

namespace woundbench {

/// Which part of a triangle the closest point lies on. Vertex and edge
/// numbering follows the face's index order.
enum class TriangleFeature : std::uint8_t { vertex0, vertex1, vertex2, edge01, edge12, edge20, interior };

struct TrianglePoint {
  Vec3 point;
  double squared_distance;
  TriangleFeature feature;
};

/// Exact closest point on triangle (a, b, c) to p, by Voronoi region.
TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct SurfaceHit {
  Vec3 point;
  double distance;
  std::uint32_t face;
  Vec3 normal; ///< face normal of `face`
  TriangleFeature feature;
};

/// Bounding volume hierarchy over a mesh's triangles answering exact
/// nearest-surface-point queries. Holds its own copy of the geometry.
///
/// Ties in distance resolve to the lowest face index, so results do not
/// depend on traversal order.
class SpatialIndex {
 public:
  explicit SpatialIndex(const TriangleMesh& mesh);

  /// Exact minimum distance. When the foot lies on an edge or vertex, every
  /// face within a round-off tolerance of the minimum is a tie and the lowest
  /// face index is reported together with its own foot point and feature.
  SurfaceHit nearest(const Vec3& query) const;

  const TriangleMesh& mesh() const { return mesh_; }

 private:
  struct Node {
    Vec3 lo;
    Vec3 hi;
    std::uint32_t begin; // into order_ (leaf) or left child (inner)
    std::uint32_t count; // > 0 for leaves
    std::uint32_t right;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);
  template <typename Visit>
  void traverse(const Vec3& query, const double& bound_d2, Visit&& visit) const;

  TriangleMesh mesh_;
  std::vector<Vec3> normals_;
  double tie_tolerance_ = 0.0;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

SurfaceHit nearest_on_surface(const SpatialIndex& index, const Vec3& query);

/// kd-tree over a point set for exact nearest-neighbour and radius queries.
class PointIndex {
 public:
  explicit PointIndex(std::vector<Vec3> points);

  struct Neighbor {
    std::size_t index;
    double distance;
  };

  /// Nearest point; ties go to the lowest index. Requires a nonempty set.
  Neighbor nearest(const Vec3& query) const;
  /// True when some point lies at distance <= radius (radius 0 means an exact
  /// positional match).
  bool any_within(const Vec3& query, double radius) const;

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

 private:
  struct Node {
    std::uint32_t point; // splitting point (index into points_)
    std::int32_t left;
    std::int32_t right;
    std::uint8_t axis;
  };

  std::int32_t build(std::uint32_t* begin, std::uint32_t* end, int depth);
  void nearest_rec(std::int32_t node, const Vec3& q, Neighbor& best, double& best_d2) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

} // namespace woundbench
