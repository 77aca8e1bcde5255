#include "woundbench/mesh.hpp"

#include "woundbench/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>

namespace woundbench {

namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) {
    std::swap(a, b);
  }
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::vector<double> edge_lengths(const TriangleMesh& mesh) {
  std::unordered_map<std::uint64_t, double> lengths;
  const auto& v = mesh.vertices();
  for (const Face& f : mesh.faces()) {
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = f[k];
      const std::uint32_t b = f[(k + 1) % 3];
      lengths.emplace(edge_key(a, b), (v[a] - v[b]).norm());
    }
  }
  std::vector<std::pair<std::uint64_t, double>> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(sorted.size());
  for (const auto& [key, len] : sorted) {
    out.push_back(len);
  }
  return out;
}

} // namespace

TriangleMesh::TriangleMesh(
    std::vector<Vec3> vertices,
    std::vector<Face> faces,
    std::optional<std::vector<Label>> labels,
    std::optional<std::vector<Rgb>> colors)
    : vertices_(std::move(vertices)), labels_(std::move(labels)), colors_(std::move(colors)) {
  if (labels_ && labels_->size() != vertices_.size()) {
    throw input_error("label count does not match vertex count");
  }
  if (colors_ && colors_->size() != vertices_.size()) {
    throw input_error("color count does not match vertex count");
  }
  faces_.reserve(faces.size());
  for (const Face& f : faces) {
    for (std::uint32_t idx : f) {
      if (idx >= vertices_.size()) {
        throw input_error("malformed face");
      }
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      ++dropped_faces_;
      continue;
    }
    const Vec3 n = (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]);
    if (!(n.norm() > 0.0)) {
      ++dropped_faces_;
      continue;
    }
    faces_.push_back(f);
  }
}

std::size_t TriangleMesh::wound_vertex_count() const {
  if (!labels_) {
    return 0;
  }
  return static_cast<std::size_t>(std::count(labels_->begin(), labels_->end(), Label::wound));
}

TriangleMesh TriangleMesh::with_labels(std::vector<Label> labels) const {
  return TriangleMesh(vertices_, faces_, std::move(labels), colors_);
}

TriangleMesh TriangleMesh::with_colors(std::vector<Rgb> colors) const {
  return TriangleMesh(vertices_, faces_, labels_, std::move(colors));
}

TriangleMesh TriangleMesh::without_labels() const {
  return TriangleMesh(vertices_, faces_, std::nullopt, colors_);
}

Vec3 TriangleMesh::face_normal(std::size_t face) const {
  const Face& f = faces_[face];
  return (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]).normalized();
}

double TriangleMesh::face_area(std::size_t face) const {
  const Face& f = faces_[face];
  return 0.5 * (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]).norm();
}

Vec3 TriangleMesh::face_centroid(std::size_t face) const {
  const Face& f = faces_[face];
  return (vertices_[f[0]] + vertices_[f[1]] + vertices_[f[2]]) / 3.0;
}

BoundingBox TriangleMesh::bounds() const {
  BoundingBox box;
  for (const Vec3& p : vertices_) {
    box.extend(p);
  }
  return box;
}

VertexNormals vertex_normals(const TriangleMesh& mesh) {
  VertexNormals out;
  out.normals.assign(mesh.vertex_count(), Vec3::Zero());
  const auto& v = mesh.vertices();
  for (const Face& f : mesh.faces()) {
    // cross product length is twice the area, so this is area weighting
    const Vec3 weighted = (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]);
    for (std::uint32_t idx : f) {
      out.normals[idx] += weighted;
    }
  }
  for (std::size_t i = 0; i < out.normals.size(); ++i) {
    const double len = out.normals[i].norm();
    if (len > 0.0) {
      out.normals[i] /= len;
    } else {
      out.normals[i].setZero();
      out.isolated.push_back(i);
    }
  }
  return out;
}

double mean_edge_length(const TriangleMesh& mesh) {
  const auto lengths = edge_lengths(mesh);
  if (lengths.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (double l : lengths) {
    sum += l;
  }
  return sum / static_cast<double>(lengths.size());
}

double median_edge_length(const TriangleMesh& mesh) {
  auto lengths = edge_lengths(mesh);
  if (lengths.empty()) {
    return 0.0;
  }
  std::sort(lengths.begin(), lengths.end());
  const std::size_t n = lengths.size();
  return n % 2 == 1 ? lengths[n / 2] : 0.5 * (lengths[n / 2 - 1] + lengths[n / 2]);
}

std::vector<std::array<std::uint32_t, 2>> boundary_edges(const TriangleMesh& mesh) {
  std::map<std::uint64_t, int> counts;
  for (const Face& f : mesh.faces()) {
    for (int k = 0; k < 3; ++k) {
      ++counts[edge_key(f[k], f[(k + 1) % 3])];
    }
  }
  std::vector<std::array<std::uint32_t, 2>> out;
  for (const auto& [key, count] : counts) {
    if (count == 1) {
      out.push_back({static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key & 0xffffffffu)});
    }
  }
  return out;
}

TriangleMesh extract_faces(const TriangleMesh& mesh, const std::vector<std::size_t>& faces) {
  constexpr std::uint32_t kUnused = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> remap(mesh.vertex_count(), kUnused);
  for (std::size_t fi : faces) {
    for (std::uint32_t idx : mesh.faces()[fi]) {
      remap[idx] = 0;
    }
  }
  // surviving vertices keep their relative order
  std::vector<Vec3> vertices;
  std::optional<std::vector<Label>> labels;
  std::optional<std::vector<Rgb>> colors;
  if (mesh.labels()) {
    labels.emplace();
  }
  if (mesh.colors()) {
    colors.emplace();
  }
  for (std::size_t i = 0; i < remap.size(); ++i) {
    if (remap[i] == kUnused) {
      continue;
    }
    remap[i] = static_cast<std::uint32_t>(vertices.size());
    vertices.push_back(mesh.vertices()[i]);
    if (labels) {
      labels->push_back((*mesh.labels())[i]);
    }
    if (colors) {
      colors->push_back((*mesh.colors())[i]);
    }
  }
  std::vector<Face> out_faces;
  out_faces.reserve(faces.size());
  for (std::size_t fi : faces) {
    const Face& f = mesh.faces()[fi];
    out_faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  }
  return TriangleMesh(std::move(vertices), std::move(out_faces), std::move(labels), std::move(colors));
}

} // namespace woundbench
