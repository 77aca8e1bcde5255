#pragma once

#include "woundbench/camera.hpp"
#include "woundbench/mesh.hpp"
#include "woundbench/transform.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace woundbench {

/// Least-squares similarity (or rigid transform when with_scale is false)
/// minimizing sum |T(src_i) - dst_i|^2, via SVD of the centered
/// cross-covariance with reflection correction.
///
/// Errors: fewer than 3 pairs -> "insufficient correspondences"; collinear or
/// coincident points -> "degenerate configuration".
SimilarityTransform procrustes_umeyama(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale);

struct IcpParams {
  int max_iterations = 50;
  /// Relative change in inlier RMS below which iteration stops.
  double convergence_tol = 1e-6;
  /// Correspondences farther than this multiple of the median distance are
  /// rejected.
  double rejection_multiplier = 3.0;
  std::size_t sample_count = 20000;
  std::uint64_t seed = 0;
  /// Absolute gate (mm) applied on top of the median rule.
  double max_correspondence_distance = std::numeric_limits<double>::infinity();
  /// Drop correspondences whose target point lies on a boundary edge or
  /// boundary vertex of the target mesh (partial-overlap handling).
  bool reject_boundary = true;
};

struct IcpDiagnostics {
  int iterations = 0;
  double initial_rms = 0.0;
  double final_rms = 0.0;
  std::size_t correspondences = 0;
  bool converged = false;
  std::vector<double> rms_history;
};

struct IcpResult {
  SimilarityTransform transform; ///< rigid, scale exactly 1
  IcpDiagnostics diagnostics;
};

/// Point-to-point ICP of `src` onto `dst`. Samples src once, then alternates
/// nearest-surface correspondence, outlier rejection and a rigid Procrustes
/// update. Returns the iterate with the lowest inlier RMS; `converged` is
/// false if the iteration cap is hit or the RMS fails to decrease for 5
/// consecutive iterations.
///
/// Errors: every correspondence rejected -> "no overlap".
IcpResult icp_rigid(const TriangleMesh& src, const TriangleMesh& dst, const IcpParams& params);

/// Keeps faces with at least one wound vertex. Errors: "empty wound region".
TriangleMesh crop_by_labels(const TriangleMesh& mesh);

/// Keeps faces whose centroid lies within `delta` of the surface of `ref`.
/// Errors: "empty crop".
TriangleMesh crop_by_proximity(const TriangleMesh& mesh, const TriangleMesh& ref, double delta);

/// Keeps faces whose centroid is within `delta` of the labeled mesh `ref` and
/// whose nearest point on `ref` lies on a face with a wound vertex, i.e. the
/// face would survive crop_by_labels(ref). Errors: "empty crop".
TriangleMesh crop_by_nearest_label(const TriangleMesh& mesh, const TriangleMesh& ref, double delta);

/// 2 x mean edge length of the cropped ground-truth wound.
double default_crop_delta(const TriangleMesh& gt_wound);

struct AlignedPair {
  TriangleMesh gt_wound;
  TriangleMesh est_wound;
  /// The whole estimate mapped into the ground-truth frame.
  TriangleMesh est_aligned;
  SimilarityTransform coarse;
  SimilarityTransform fine;
  IcpDiagnostics diagnostics;
  double delta = 0.0;
  std::size_t camera_pairs = 0;

  SimilarityTransform total() const { return compose(fine, coarse); }
};

/// Three-step registration of an estimated mesh to labeled ground truth:
///  1. similarity Procrustes from estimated to ground-truth camera centers,
///     matched by view name;
///  2. crop ground truth by labels, crop the coarse-aligned estimate by
///     proximity, and refine with rigid ICP on the crops;
///  3. apply fine * coarse to the original estimate and crop both again.
///
/// delta <= 0 selects default_crop_delta.
AlignedPair align_pipeline(
    const TriangleMesh& gt,
    const TriangleMesh& est,
    const std::vector<CameraView>& gt_cams,
    const std::vector<CameraView>& est_cams,
    const IcpParams& icp,
    double delta = 0.0);

} // namespace woundbench
