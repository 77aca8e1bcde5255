#include "woundbench/alignment.hpp"

#include "woundbench/error.hpp"
#include "woundbench/parallel.hpp"
#include "woundbench/sampling.hpp"
#include "woundbench/spatial_index.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

namespace woundbench {

SimilarityTransform procrustes_umeyama(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale) {
  if (src.size() != dst.size()) {
    throw input_error("correspondence lists differ in length");
  }
  const std::size_t n = src.size();
  if (n < 3) {
    throw numerical_error("insufficient correspondences");
  }
  Vec3 mu_src = Vec3::Zero();
  Vec3 mu_dst = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src /= static_cast<double>(n);
  mu_dst /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  Mat3 src_cov = Mat3::Zero();
  double src_var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 a = src[i] - mu_src;
    const Vec3 b = dst[i] - mu_dst;
    cov += b * a.transpose();
    src_cov += a * a.transpose();
    src_var += a.squaredNorm();
  }
  cov /= static_cast<double>(n);
  src_cov /= static_cast<double>(n);
  src_var /= static_cast<double>(n);

  // Rank < 2 in either the source spread or the cross-covariance leaves the
  // rotation about the common line undetermined.
  const Eigen::JacobiSVD<Mat3> src_svd(src_cov);
  const Vec3 src_sv = src_svd.singularValues();
  if (!(src_sv(0) > 0.0) || src_sv(1) <= 1e-12 * src_sv(0)) {
    throw numerical_error("degenerate configuration");
  }
  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw numerical_error("degenerate configuration");
  }

  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 s = Vec3::Ones();
  if (u.determinant() * v.determinant() < 0.0) {
    s(2) = -1.0;
  }
  const Mat3 rotation = u * s.asDiagonal() * v.transpose();
  const double scale = with_scale ? sv.dot(s) / src_var : 1.0;
  const Vec3 translation = mu_dst - scale * (rotation * mu_src);
  return {scale, rotation, translation};
}

namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) {
    std::swap(a, b);
  }
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Classifies nearest-point hits that land on the open rim of a mesh.
class BoundaryFilter {
 public:
  explicit BoundaryFilter(const TriangleMesh& mesh) : faces_(mesh.faces()) {
    for (const auto& e : boundary_edges(mesh)) {
      edges_.insert(edge_key(e[0], e[1]));
      vertices_.insert(e[0]);
      vertices_.insert(e[1]);
    }
  }

  bool on_boundary(const SurfaceHit& hit) const {
    if (edges_.empty()) {
      return false;
    }
    const Face& f = faces_[hit.face];
    switch (hit.feature) {
      case TriangleFeature::vertex0: return vertices_.contains(f[0]);
      case TriangleFeature::vertex1: return vertices_.contains(f[1]);
      case TriangleFeature::vertex2: return vertices_.contains(f[2]);
      case TriangleFeature::edge01: return edges_.contains(edge_key(f[0], f[1]));
      case TriangleFeature::edge12: return edges_.contains(edge_key(f[1], f[2]));
      case TriangleFeature::edge20: return edges_.contains(edge_key(f[2], f[0]));
      case TriangleFeature::interior: return false;
    }
    return false;
  }

 private:
  const std::vector<Face>& faces_;
  std::unordered_set<std::uint64_t> edges_;
  std::unordered_set<std::uint32_t> vertices_;
};

double median_of(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

} // namespace

IcpResult icp_rigid(const TriangleMesh& src, const TriangleMesh& dst, const IcpParams& params) {
  if (params.max_iterations < 1) {
    throw input_error("max_iterations must be at least 1");
  }
  if (!(params.convergence_tol > 0.0) || !(params.rejection_multiplier > 0.0) ||
      !(params.max_correspondence_distance > 0.0)) {
    throw input_error("ICP tolerances must be positive");
  }
  if (src.empty() || dst.empty()) {
    throw input_error("empty mesh");
  }

  const auto samples = sample_surface(src, params.sample_count, params.seed);
  const SpatialIndex index(dst);
  const BoundaryFilter boundary(dst);
  // RMS below this is indistinguishable from rounding noise
  const double noise_floor = 1e-12 * std::max(1.0, dst.bounds().diagonal());

  const std::size_t n = samples.size();
  std::vector<Vec3> moved(n);
  std::vector<SurfaceHit> hits(n);
  std::vector<Vec3> src_pts;
  std::vector<Vec3> dst_pts;

  SimilarityTransform current;
  IcpResult best{current, {}};
  double best_rms = std::numeric_limits<double>::infinity();
  double prev_rms = std::numeric_limits<double>::infinity();
  int non_decreasing = 0;
  IcpDiagnostics diag;

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    parallel_for(n, [&](std::size_t i) {
      moved[i] = current(samples[i].point);
      hits[i] = index.nearest(moved[i]);
    });

    std::vector<std::size_t> candidates;
    std::vector<double> candidate_dist;
    for (std::size_t i = 0; i < n; ++i) {
      if (params.reject_boundary && boundary.on_boundary(hits[i])) {
        continue;
      }
      if (hits[i].distance > params.max_correspondence_distance) {
        continue;
      }
      candidates.push_back(i);
      candidate_dist.push_back(hits[i].distance);
    }
    if (candidates.empty()) {
      throw numerical_error("no overlap");
    }
    const double threshold = params.rejection_multiplier * median_of(candidate_dist);

    src_pts.clear();
    dst_pts.clear();
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (candidate_dist[k] > threshold) {
        continue;
      }
      const std::size_t i = candidates[k];
      src_pts.push_back(moved[i]);
      dst_pts.push_back(hits[i].point);
      sum_sq += candidate_dist[k] * candidate_dist[k];
    }
    if (src_pts.empty()) {
      throw numerical_error("no overlap");
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(src_pts.size()));

    diag.iterations = iter;
    diag.rms_history.push_back(rms);
    if (iter == 1) {
      diag.initial_rms = rms;
    }
    if (rms < best_rms) {
      best_rms = rms;
      best.transform = current;
      diag.final_rms = rms;
      diag.correspondences = src_pts.size();
    }

    if (rms <= noise_floor ||
        (std::isfinite(prev_rms) && std::abs(prev_rms - rms) <= params.convergence_tol * prev_rms)) {
      diag.converged = true;
      break;
    }
    non_decreasing = rms >= prev_rms ? non_decreasing + 1 : 0;
    if (non_decreasing >= 5) {
      break;
    }
    if (iter == params.max_iterations) {
      break;
    }

    const SimilarityTransform step = procrustes_umeyama(src_pts, dst_pts, false);
    const SimilarityTransform next = compose(step, current);
    // keep the scale exactly 1 despite composition round-off
    current = SimilarityTransform::rigid(next.rotation(), next.translation());
    prev_rms = rms;
  }

  best.diagnostics = std::move(diag);
  return best;
}

TriangleMesh crop_by_labels(const TriangleMesh& mesh) {
  if (!mesh.has_labels()) {
    throw input_error("mesh has no labels");
  }
  std::vector<std::size_t> keep;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces()[f];
    if (mesh.is_wound(face[0]) || mesh.is_wound(face[1]) || mesh.is_wound(face[2])) {
      keep.push_back(f);
    }
  }
  if (keep.empty()) {
    throw input_error("empty wound region");
  }
  return extract_faces(mesh, keep);
}

TriangleMesh crop_by_proximity(const TriangleMesh& mesh, const TriangleMesh& ref, double delta) {
  if (!(delta > 0.0)) {
    throw input_error("crop delta must be positive");
  }
  const SpatialIndex index(ref);
  std::vector<std::uint8_t> inside(mesh.face_count(), 0);
  parallel_for(mesh.face_count(), [&](std::size_t f) {
    inside[f] = index.nearest(mesh.face_centroid(f)).distance <= delta ? 1 : 0;
  });
  std::vector<std::size_t> keep;
  for (std::size_t f = 0; f < inside.size(); ++f) {
    if (inside[f] != 0) {
      keep.push_back(f);
    }
  }
  if (keep.empty()) {
    throw numerical_error("empty crop");
  }
  return extract_faces(mesh, keep);
}

TriangleMesh crop_by_nearest_label(const TriangleMesh& mesh, const TriangleMesh& ref, double delta) {
  if (!ref.has_labels()) {
    throw input_error("reference mesh has no labels");
  }
  if (!(delta > 0.0)) {
    throw input_error("crop delta must be positive");
  }
  std::vector<std::uint8_t> wound_face(ref.face_count(), 0);
  for (std::size_t f = 0; f < ref.face_count(); ++f) {
    const Face& face = ref.faces()[f];
    wound_face[f] = (ref.is_wound(face[0]) || ref.is_wound(face[1]) || ref.is_wound(face[2])) ? 1 : 0;
  }
  const SpatialIndex index(ref);
  std::vector<std::uint8_t> inside(mesh.face_count(), 0);
  parallel_for(mesh.face_count(), [&](std::size_t f) {
    const SurfaceHit hit = index.nearest(mesh.face_centroid(f));
    inside[f] = (hit.distance <= delta && wound_face[hit.face] != 0) ? 1 : 0;
  });
  std::vector<std::size_t> keep;
  for (std::size_t f = 0; f < inside.size(); ++f) {
    if (inside[f] != 0) {
      keep.push_back(f);
    }
  }
  if (keep.empty()) {
    throw numerical_error("empty crop");
  }
  return extract_faces(mesh, keep);
}

double default_crop_delta(const TriangleMesh& gt_wound) {
  return 2.0 * mean_edge_length(gt_wound);
}

AlignedPair align_pipeline(
    const TriangleMesh& gt,
    const TriangleMesh& est,
    const std::vector<CameraView>& gt_cams,
    const std::vector<CameraView>& est_cams,
    const IcpParams& icp,
    double delta) {
  if (!gt.has_labels()) {
    throw input_error("ground-truth mesh has no labels");
  }
  if (est.empty() || gt.empty()) {
    throw input_error("empty mesh");
  }

  // std::map orders pairs by name, so the input order of either list is irrelevant
  std::map<std::string, Vec3> est_centers;
  for (const CameraView& cam : est_cams) {
    est_centers[cam.name] = cam.center();
  }
  std::map<std::string, Vec3> gt_centers;
  for (const CameraView& cam : gt_cams) {
    gt_centers[cam.name] = cam.center();
  }
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  for (const auto& [name, center] : gt_centers) {
    const auto it = est_centers.find(name);
    if (it != est_centers.end()) {
      src.push_back(it->second);
      dst.push_back(center);
    }
  }
  if (src.size() < 3) {
    throw input_error("insufficient camera correspondences");
  }

  AlignedPair out;
  out.camera_pairs = src.size();
  out.coarse = procrustes_umeyama(src, dst, true);

  const TriangleMesh est_coarse = apply_transform(out.coarse, est);
  const TriangleMesh gt_wound = crop_by_labels(gt);
  out.delta = delta > 0.0 ? delta : default_crop_delta(gt_wound);
  const TriangleMesh est_coarse_wound = crop_by_proximity(est_coarse, gt_wound, out.delta);

  const IcpResult fine = icp_rigid(est_coarse_wound, gt_wound, icp);
  out.fine = fine.transform;
  out.diagnostics = fine.diagnostics;

  out.est_aligned = apply_transform(out.total(), est);
  out.gt_wound = gt_wound;
  out.est_wound = crop_by_nearest_label(out.est_aligned, gt, out.delta);
  return out;
}

} // namespace woundbench
