#pragma once

#include "woundbench/mask.hpp"
#include "woundbench/mesh.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace woundbench {

constexpr std::size_t kDefaultMetricSamples = 100000;

// Surface metrics sample both meshes with the same seed, so every metric is
// exactly symmetric in its two mesh arguments.

/// Mean of the two directed mean nearest-surface distances (mm).
double asd(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed);

/// Max of the two directed 90th percentiles (nearest rank: the
/// ceil(0.9 n)-th smallest distance).
double hd90(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed);

/// Mean |n_a . n_b| between the face normal at each sample and at its nearest
/// point on the other surface, averaged over both directions.
double normal_consistency(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed);

struct SurfaceMetrics {
  double asd = 0.0;
  double hd90 = 0.0;
  double nc = 0.0;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
};

/// All three surface metrics from one shared set of samples and queries.
SurfaceMetrics surface_metrics(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed);

/// Nearest-rank percentile of an unsorted list, p in (0, 1].
double nearest_rank_percentile(std::vector<double> values, double p);

/// Balanced average Hausdorff distance:
///   (H(G, S) + H(S, G)) / (2 |G|),  H(X, Y) = sum_x min_y |x - y|.
double bahd(std::span<const Vec3> gt, std::span<const Vec3> seg);

struct SegmentationCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Vertex-level confusion between labeled meshes. A predicted wound vertex is
/// a true positive when a ground-truth wound vertex lies within tau (tau = 0
/// demands an exact positional match), otherwise a false positive. Ground
/// truth wound vertices with no predicted wound vertex within tau are false
/// negatives. Precision is 0 when nothing is predicted.
///
/// Errors: "empty ground truth segmentation".
SegmentationCounts vertex_precision_recall(const TriangleMesh& gt, const TriangleMesh& pred, double tau);

/// Median edge length of the ground-truth wound crop.
double default_match_tau(const TriangleMesh& gt);

/// Wound vertex positions.
std::vector<Vec3> wound_points(const TriangleMesh& mesh);

inline constexpr Rgb kTruePositiveColor{173, 216, 230};
inline constexpr Rgb kFalsePositiveColor{0, 0, 255};
inline constexpr Rgb kFalseNegativeColor{255, 255, 0};
inline constexpr Rgb kBackgroundColor{128, 128, 128};

/// The predicted mesh colored by confusion class: predicted wound vertices
/// are TP or FP; a predicted background vertex is FN when a false-negative
/// ground-truth vertex lies within tau of it, grey otherwise. When both meshes
/// share vertex positions the color counts equal vertex_precision_recall.
TriangleMesh confusion_colored_mesh(const TriangleMesh& gt, const TriangleMesh& pred, double tau);

struct MaskOverlap {
  std::size_t intersection = 0;
  std::size_t a = 0;
  std::size_t b = 0;
};

/// Errors: dimension mismatch.
MaskOverlap mask_overlap(const BinaryMask2D& a, const BinaryMask2D& b);

/// |A n B| / |A u B|; 1 when both masks are empty.
double iou(const BinaryMask2D& a, const BinaryMask2D& b);
/// 2 |A n B| / (|A| + |B|); 1 when both masks are empty.
double dice(const BinaryMask2D& a, const BinaryMask2D& b);

} // namespace woundbench
