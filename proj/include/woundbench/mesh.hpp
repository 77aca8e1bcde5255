#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace woundbench {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<std::uint32_t, 3>;
using Rgb = std::array<std::uint8_t, 3>;

enum class Label : std::uint8_t { background = 0, wound = 1 };

struct BoundingBox {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  double diagonal() const { return (max - min).norm(); }
};

/// Indexed triangle surface in millimetres with optional per-vertex wound
/// labels and colors.
///
/// Immutable once built. The constructor rejects out-of-range indices and
/// silently drops degenerate faces (repeated indices or zero area); the
/// number dropped is available from dropped_faces().
class TriangleMesh {
 public:
  TriangleMesh() = default;
  TriangleMesh(
      std::vector<Vec3> vertices,
      std::vector<Face> faces,
      std::optional<std::vector<Label>> labels = std::nullopt,
      std::optional<std::vector<Rgb>> colors = std::nullopt);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::optional<std::vector<Label>>& labels() const { return labels_; }
  const std::optional<std::vector<Rgb>>& colors() const { return colors_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t face_count() const { return faces_.size(); }
  bool empty() const { return faces_.empty(); }
  bool has_labels() const { return labels_.has_value(); }
  std::size_t dropped_faces() const { return dropped_faces_; }

  bool is_wound(std::size_t vertex) const {
    return labels_ && (*labels_)[vertex] == Label::wound;
  }
  std::size_t wound_vertex_count() const;

  TriangleMesh with_labels(std::vector<Label> labels) const;
  TriangleMesh with_colors(std::vector<Rgb> colors) const;
  TriangleMesh without_labels() const;

  Vec3 face_normal(std::size_t face) const;
  double face_area(std::size_t face) const;
  Vec3 face_centroid(std::size_t face) const;
  BoundingBox bounds() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::optional<std::vector<Label>> labels_;
  std::optional<std::vector<Rgb>> colors_;
  std::size_t dropped_faces_ = 0;
};

struct VertexNormals {
  std::vector<Vec3> normals;
  /// Vertices with no incident face; their normal is the zero vector.
  std::vector<std::size_t> isolated;
};

/// Area-weighted average of incident face normals, normalized.
VertexNormals vertex_normals(const TriangleMesh& mesh);

double mean_edge_length(const TriangleMesh& mesh);
double median_edge_length(const TriangleMesh& mesh);

/// Undirected edge (lo, hi) with exactly one incident face.
std::vector<std::array<std::uint32_t, 2>> boundary_edges(const TriangleMesh& mesh);

/// Keeps the listed faces, re-indexing the vertices they use compactly.
/// Labels and colors follow their vertices.
TriangleMesh extract_faces(const TriangleMesh& mesh, const std::vector<std::size_t>& faces);

} // namespace woundbench
