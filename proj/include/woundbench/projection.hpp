#pragma once

#include "woundbench/camera.hpp"
#include "woundbench/mask.hpp"
#include "woundbench/mesh.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace woundbench {

inline constexpr std::uint32_t kEmptyPixel = std::numeric_limits<std::uint32_t>::max();
inline constexpr double kNearPlane = 1e-6;

/// Per-pixel nearest camera-frame depth and the face that produced it.
struct DepthBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> depth;          ///< +infinity where empty
  std::vector<std::uint32_t> face_id; ///< kEmptyPixel where empty

  DepthBuffer(int w, int h);

  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col);
  }
  std::uint32_t face_at(int col, int row) const { return face_id[index(col, row)]; }
  double depth_at(int col, int row) const { return depth[index(col, row)]; }
  std::size_t covered() const;
};

/// Z-buffered perspective rasterization sampling pixel centers with a
/// top-left tie rule. Triangles are clipped against the near plane
/// z = kNearPlane; no back-face culling. Ties in depth keep the lower face
/// index.
DepthBuffer rasterize(const TriangleMesh& mesh, const CameraView& cam);

struct VertexVote {
  std::uint32_t visible_views = 0;
  std::uint32_t wound_votes = 0;
};

struct ProjectionParams {
  /// Minimum wound-vote fraction among visible views, in (0, 1].
  double theta = 0.5;
  /// Depth slack (mm) for the visibility test; nullopt selects
  /// 1e-3 x mesh bounding-box diagonal.
  std::optional<double> bias;
};

struct ProjectionResult {
  TriangleMesh mesh; ///< input geometry with projected labels
  std::vector<VertexVote> votes;
  std::size_t unobserved = 0;
  double bias = 0.0;
};

/// Multi-view vertex voting. A vertex is visible in a view when it projects
/// in front of the camera, inside the image, and no deeper than the z-buffer
/// at its pixel plus `bias`; each visible view votes with the mask bit at that
/// pixel. Wound iff visible somewhere and wound_votes / visible_views >= theta.
///
/// Errors: camera/mask count mismatch, mask size differing from its camera.
ProjectionResult project_masks(
    const TriangleMesh& mesh,
    const std::vector<CameraView>& cams,
    const std::vector<BinaryMask2D>& masks,
    const ProjectionParams& params = {});

} // namespace woundbench
