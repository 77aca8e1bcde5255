#include "woundbench/metrics.hpp"

#include "woundbench/alignment.hpp"
#include "woundbench/error.hpp"
#include "woundbench/parallel.hpp"
#include "woundbench/sampling.hpp"
#include "woundbench/spatial_index.hpp"

#include <algorithm>
#include <cmath>

namespace woundbench {

namespace {

struct Directed {
  std::vector<double> distances;
  std::vector<double> normal_agreement;
};

Directed directed_queries(const TriangleMesh& from, const SpatialIndex& to, std::size_t n, std::uint64_t seed) {
  const auto samples = sample_surface(from, n, seed);
  Directed out;
  out.distances.resize(samples.size());
  out.normal_agreement.resize(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const SurfaceHit hit = to.nearest(samples[i].point);
    out.distances[i] = hit.distance;
    out.normal_agreement[i] = std::min(1.0, std::abs(samples[i].normal.dot(hit.normal)));
  });
  return out;
}

double mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  return sum / static_cast<double>(values.size());
}

void require_nonempty(const TriangleMesh& a, const TriangleMesh& b, std::size_t n) {
  if (a.empty() || b.empty()) {
    throw input_error("empty mesh");
  }
  if (n == 0) {
    throw input_error("sample count must be positive");
  }
}

std::pair<Directed, Directed> both_directions(
    const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed) {
  require_nonempty(a, b, n);
  const SpatialIndex index_a(a);
  const SpatialIndex index_b(b);
  return {directed_queries(a, index_b, n, seed), directed_queries(b, index_a, n, seed)};
}

} // namespace

double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) {
    throw input_error("percentile of empty list");
  }
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
  const std::size_t idx = std::clamp<std::size_t>(rank, 1, values.size()) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx), values.end());
  return values[idx];
}

SurfaceMetrics surface_metrics(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed) {
  const auto [ab, ba] = both_directions(a, b, n, seed);
  SurfaceMetrics m;
  m.asd = 0.5 * (mean(ab.distances) + mean(ba.distances));
  m.hd90 = std::max(nearest_rank_percentile(ab.distances, 0.9), nearest_rank_percentile(ba.distances, 0.9));
  m.nc = 0.5 * (mean(ab.normal_agreement) + mean(ba.normal_agreement));
  m.sample_count = n;
  m.seed = seed;
  return m;
}

double asd(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed) {
  return surface_metrics(a, b, n, seed).asd;
}

double hd90(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed) {
  return surface_metrics(a, b, n, seed).hd90;
}

double normal_consistency(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed) {
  return surface_metrics(a, b, n, seed).nc;
}

double bahd(std::span<const Vec3> gt, std::span<const Vec3> seg) {
  if (gt.empty() || seg.empty()) {
    throw input_error("empty point set");
  }
  const PointIndex gt_index(std::vector<Vec3>(gt.begin(), gt.end()));
  const PointIndex seg_index(std::vector<Vec3>(seg.begin(), seg.end()));
  std::vector<double> gs(gt.size());
  std::vector<double> sg(seg.size());
  parallel_for(gt.size(), [&](std::size_t i) { gs[i] = seg_index.nearest(gt[i]).distance; });
  parallel_for(seg.size(), [&](std::size_t i) { sg[i] = gt_index.nearest(seg[i]).distance; });
  double h_gs = 0.0;
  for (double d : gs) {
    h_gs += d;
  }
  double h_sg = 0.0;
  for (double d : sg) {
    h_sg += d;
  }
  return (h_gs + h_sg) / (2.0 * static_cast<double>(gt.size()));
}

std::vector<Vec3> wound_points(const TriangleMesh& mesh) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    if (mesh.is_wound(i)) {
      out.push_back(mesh.vertices()[i]);
    }
  }
  return out;
}

namespace {

struct VertexConfusion {
  std::vector<std::uint8_t> pred_matched; // per pred vertex, wound only
  std::vector<std::uint8_t> gt_missed;    // per gt vertex, wound only
  SegmentationCounts counts;
};

VertexConfusion classify(const TriangleMesh& gt, const TriangleMesh& pred, double tau) {
  if (!gt.has_labels() || !pred.has_labels()) {
    throw input_error("segmentation meshes must carry labels");
  }
  if (!(tau >= 0.0)) {
    throw input_error("tau must be non-negative");
  }
  const auto gt_wound = wound_points(gt);
  if (gt_wound.empty()) {
    throw input_error("empty ground truth segmentation");
  }
  const auto pred_wound = wound_points(pred);
  const PointIndex gt_index(gt_wound);
  const PointIndex pred_index(pred_wound);

  VertexConfusion out;
  out.pred_matched.assign(pred.vertex_count(), 0);
  out.gt_missed.assign(gt.vertex_count(), 0);
  for (std::size_t i = 0; i < pred.vertex_count(); ++i) {
    if (!pred.is_wound(i)) {
      continue;
    }
    if (gt_index.any_within(pred.vertices()[i], tau)) {
      out.pred_matched[i] = 1;
      ++out.counts.tp;
    } else {
      ++out.counts.fp;
    }
  }
  for (std::size_t i = 0; i < gt.vertex_count(); ++i) {
    if (gt.is_wound(i) && !pred_index.any_within(gt.vertices()[i], tau)) {
      out.gt_missed[i] = 1;
      ++out.counts.fn;
    }
  }
  const auto& c = out.counts;
  out.counts.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  out.counts.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  return out;
}

} // namespace

SegmentationCounts vertex_precision_recall(const TriangleMesh& gt, const TriangleMesh& pred, double tau) {
  return classify(gt, pred, tau).counts;
}

double default_match_tau(const TriangleMesh& gt) {
  return median_edge_length(crop_by_labels(gt));
}

TriangleMesh confusion_colored_mesh(const TriangleMesh& gt, const TriangleMesh& pred, double tau) {
  const VertexConfusion conf = classify(gt, pred, tau);
  std::vector<Vec3> missed;
  for (std::size_t i = 0; i < gt.vertex_count(); ++i) {
    if (conf.gt_missed[i] != 0) {
      missed.push_back(gt.vertices()[i]);
    }
  }
  const PointIndex missed_index(missed);

  std::vector<Rgb> colors(pred.vertex_count(), kBackgroundColor);
  for (std::size_t i = 0; i < pred.vertex_count(); ++i) {
    if (pred.is_wound(i)) {
      colors[i] = conf.pred_matched[i] != 0 ? kTruePositiveColor : kFalsePositiveColor;
    } else if (missed_index.any_within(pred.vertices()[i], tau)) {
      colors[i] = kFalseNegativeColor;
    }
  }
  return pred.with_colors(std::move(colors));
}

MaskOverlap mask_overlap(const BinaryMask2D& a, const BinaryMask2D& b) {
  if (a.width != b.width || a.height != b.height || a.pixels.size() != b.pixels.size()) {
    throw input_error("mask dimension mismatch");
  }
  MaskOverlap out;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const bool pa = a.pixels[i] != 0;
    const bool pb = b.pixels[i] != 0;
    out.a += pa ? 1 : 0;
    out.b += pb ? 1 : 0;
    out.intersection += (pa && pb) ? 1 : 0;
  }
  return out;
}

double iou(const BinaryMask2D& a, const BinaryMask2D& b) {
  const MaskOverlap o = mask_overlap(a, b);
  const std::size_t uni = o.a + o.b - o.intersection;
  if (uni == 0) {
    return 1.0;
  }
  return static_cast<double>(o.intersection) / static_cast<double>(uni);
}

double dice(const BinaryMask2D& a, const BinaryMask2D& b) {
  const MaskOverlap o = mask_overlap(a, b);
  if (o.a + o.b == 0) {
    return 1.0;
  }
  return 2.0 * static_cast<double>(o.intersection) / static_cast<double>(o.a + o.b);
}

} // namespace woundbench
