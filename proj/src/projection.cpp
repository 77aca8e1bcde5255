#include "woundbench/projection.hpp"

#include "woundbench/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace woundbench {

DepthBuffer::DepthBuffer(int w, int h)
    : width(w),
      height(h),
      depth(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), std::numeric_limits<double>::infinity()),
      face_id(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), kEmptyPixel) {}

std::size_t DepthBuffer::covered() const {
  return static_cast<std::size_t>(std::count_if(face_id.begin(), face_id.end(), [](std::uint32_t f) {
    return f != kEmptyPixel;
  }));
}

namespace {

struct ScreenVertex {
  double u;
  double v;
  double inv_z;
};

double edge(const ScreenVertex& a, const ScreenVertex& b, double x, double y) {
  return (b.u - a.u) * (y - a.v) - (b.v - a.v) * (x - a.u);
}

// Pixel centers exactly on an edge belong to one of the two triangles
// sharing it: the two traverse the edge in opposite directions.
bool owns_edge(const ScreenVertex& a, const ScreenVertex& b) {
  const double dy = b.v - a.v;
  const double dx = b.u - a.u;
  return dy > 0.0 || (dy == 0.0 && dx < 0.0);
}

bool covers(double w, bool owned) {
  return w > 0.0 || (w == 0.0 && owned);
}

void raster_triangle(ScreenVertex p0, ScreenVertex p1, ScreenVertex p2, std::uint32_t face, DepthBuffer& buf) {
  double area = edge(p0, p1, p2.u, p2.v);
  if (!(area != 0.0) || !std::isfinite(area)) {
    return;
  }
  if (area < 0.0) {
    std::swap(p1, p2);
    area = -area;
  }
  const double min_u = std::min({p0.u, p1.u, p2.u});
  const double max_u = std::max({p0.u, p1.u, p2.u});
  const double min_v = std::min({p0.v, p1.v, p2.v});
  const double max_v = std::max({p0.v, p1.v, p2.v});
  const int col_begin = std::max(0, static_cast<int>(std::ceil(std::max(min_u - 0.5, -1.0))));
  const int col_end = std::min(buf.width - 1, static_cast<int>(std::floor(std::min(max_u - 0.5, 1e9))));
  const int row_begin = std::max(0, static_cast<int>(std::ceil(std::max(min_v - 0.5, -1.0))));
  const int row_end = std::min(buf.height - 1, static_cast<int>(std::floor(std::min(max_v - 0.5, 1e9))));
  if (col_begin > col_end || row_begin > row_end) {
    return;
  }
  const bool own0 = owns_edge(p1, p2);
  const bool own1 = owns_edge(p2, p0);
  const bool own2 = owns_edge(p0, p1);
  for (int row = row_begin; row <= row_end; ++row) {
    const double y = row + 0.5;
    for (int col = col_begin; col <= col_end; ++col) {
      const double x = col + 0.5;
      const double w0 = edge(p1, p2, x, y);
      const double w1 = edge(p2, p0, x, y);
      const double w2 = edge(p0, p1, x, y);
      if (!covers(w0, own0) || !covers(w1, own1) || !covers(w2, own2)) {
        continue;
      }
      // 1/z is affine in screen space
      const double inv_z = (w0 * p0.inv_z + w1 * p1.inv_z + w2 * p2.inv_z) / area;
      const double z = 1.0 / inv_z;
      const std::size_t idx = buf.index(col, row);
      if (z < buf.depth[idx] || (z == buf.depth[idx] && face < buf.face_id[idx])) {
        buf.depth[idx] = z;
        buf.face_id[idx] = face;
      }
    }
  }
}

} // namespace

DepthBuffer rasterize(const TriangleMesh& mesh, const CameraView& cam) {
  validate_camera(cam);
  DepthBuffer buf(cam.width, cam.height);
  const auto& v = mesh.vertices();

  std::array<Vec3, 4> clipped{};
  for (std::size_t fi = 0; fi < mesh.face_count(); ++fi) {
    const Face& f = mesh.faces()[fi];
    const std::array<Vec3, 3> pc{cam.to_camera(v[f[0]]), cam.to_camera(v[f[1]]), cam.to_camera(v[f[2]])};

    // Sutherland-Hodgman against z >= near; a triangle yields at most a quad
    std::size_t count = 0;
    for (int k = 0; k < 3; ++k) {
      const Vec3& a = pc[k];
      const Vec3& b = pc[(k + 1) % 3];
      const bool a_in = a.z() >= kNearPlane;
      const bool b_in = b.z() >= kNearPlane;
      if (a_in) {
        clipped[count++] = a;
      }
      if (a_in != b_in) {
        const double t = (kNearPlane - a.z()) / (b.z() - a.z());
        Vec3 p = a + t * (b - a);
        p.z() = kNearPlane;
        clipped[count++] = p;
      }
    }
    if (count < 3) {
      continue;
    }

    std::array<ScreenVertex, 4> screen{};
    for (std::size_t k = 0; k < count; ++k) {
      const Vec3& p = clipped[k];
      screen[k] = {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy, 1.0 / p.z()};
    }
    const auto face = static_cast<std::uint32_t>(fi);
    for (std::size_t k = 1; k + 1 < count; ++k) {
      raster_triangle(screen[0], screen[k], screen[k + 1], face, buf);
    }
  }
  return buf;
}

ProjectionResult project_masks(
    const TriangleMesh& mesh,
    const std::vector<CameraView>& cams,
    const std::vector<BinaryMask2D>& masks,
    const ProjectionParams& params) {
  if (cams.size() != masks.size()) {
    throw input_error("camera and mask counts differ");
  }
  if (!(params.theta > 0.0 && params.theta <= 1.0)) {
    throw input_error("theta must lie in (0, 1]");
  }
  for (std::size_t i = 0; i < cams.size(); ++i) {
    if (masks[i].width != cams[i].width || masks[i].height != cams[i].height) {
      throw input_error("mask size does not match camera " + cams[i].name);
    }
  }

  ProjectionResult out;
  out.bias = params.bias.value_or(1e-3 * mesh.bounds().diagonal());
  if (!(out.bias >= 0.0)) {
    throw input_error("bias must be non-negative");
  }
  out.votes.assign(mesh.vertex_count(), {});

  for (std::size_t view = 0; view < cams.size(); ++view) {
    const CameraView& cam = cams[view];
    const BinaryMask2D& mask = masks[view];
    const DepthBuffer buf = rasterize(mesh, cam);
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
      const auto proj = project_vertex(cam, mesh.vertices()[i]);
      if (!proj) {
        continue;
      }
      const double col = std::floor(proj->u);
      const double row = std::floor(proj->v);
      if (col < 0.0 || row < 0.0 || col >= cam.width || row >= cam.height) {
        continue;
      }
      const int c = static_cast<int>(col);
      const int r = static_cast<int>(row);
      if (proj->depth > buf.depth_at(c, r) + out.bias) {
        continue;
      }
      ++out.votes[i].visible_views;
      if (mask.at(c, r)) {
        ++out.votes[i].wound_votes;
      }
    }
  }

  std::vector<Label> labels(mesh.vertex_count(), Label::background);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const VertexVote& vote = out.votes[i];
    if (vote.visible_views == 0) {
      ++out.unobserved;
      continue;
    }
    const double fraction = static_cast<double>(vote.wound_votes) / static_cast<double>(vote.visible_views);
    if (fraction >= params.theta) {
      labels[i] = Label::wound;
    }
  }
  out.mesh = mesh.with_labels(std::move(labels));
  return out;
}

} // namespace woundbench
