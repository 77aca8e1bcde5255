#pragma once

#include "woundbench/camera.hpp"
#include "woundbench/mask.hpp"
#include "woundbench/mesh.hpp"
#include "woundbench/transform.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace woundbench {

enum class BodyShape { cylinder, sphere };

BodyShape parse_body_shape(const std::string& name);
std::string to_string(BodyShape shape);

/// Watertight stand-in body part with outward-facing triangles.
///
/// sphere: icosahedron subdivided `level` times, radius `size`.
/// cylinder: radius `size`, length 4 x size along the x axis, centered on the
/// origin, 8 * 2^level segments around and rings along, capped by fans.
TriangleMesh gen_body_part(BodyShape shape, int level, double size);

struct WoundSpec {
  Vec3 center = Vec3::Zero();
  double radius = 15.0;
  double depth = 5.0;
};

/// Labels vertices with |v - center| < R as wound and pushes them inward
/// along their vertex normal by depth * (1 - (r / R)^2)^2.
///
/// Errors: "wound region empty - refine tessellation".
TriangleMesh carve_wound(const TriangleMesh& mesh, const WoundSpec& spec);

/// `count` cameras equally spaced in azimuth (starting at 0 about +z) on a
/// circle of `ring_radius` around `target`, raised by `elevation_deg`, each
/// looking at `target` with world +z as up. Names are view_000, view_001, ...
std::vector<CameraView> gen_camera_ring(
    const Vec3& target,
    int count,
    double ring_radius,
    double elevation_deg,
    int width,
    int height,
    double fov_deg);

/// A camera at `center` looking at `target` (world +z up unless parallel).
CameraView look_at_camera(
    const std::string& name, const Vec3& center, const Vec3& target, int width, int height, double fov_deg);

/// Pixel is wound iff its front-most face has at least two wound vertices.
std::vector<BinaryMask2D> render_gt_masks(const TriangleMesh& mesh, const std::vector<CameraView>& cams);

/// Applies t, then adds i.i.d. N(0, sigma^2) to every coordinate. Labels are
/// dropped.
TriangleMesh perturb(const TriangleMesh& mesh, const SimilarityTransform& t, double sigma, std::uint64_t seed);

/// The camera seen from the frame of a world mapped through t: same image,
/// center t(c), orientation R_cam * R_t^T.
CameraView transform_camera(const CameraView& cam, const SimilarityTransform& t);

struct FixtureParams {
  BodyShape shape = BodyShape::sphere;
  int level = 4;
  double size = 40.0;
  /// Defaults to the top of the body part, (0, 0, size).
  std::optional<Vec3> wound_center;
  double wound_radius = 15.0;
  double wound_depth = 5.0;
  int views = 12;
  int resolution = 512;
  double fov_deg = 40.0;
  double ring_radius = 150.0;
  double elevation_deg = 45.0;
  SimilarityTransform transform;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct FixtureBundle {
  FixtureParams params;
  WoundSpec wound;
  TriangleMesh gt_mesh;
  std::vector<CameraView> cams;
  std::vector<BinaryMask2D> masks;
  TriangleMesh est_mesh;
  std::vector<CameraView> est_cams;
  SimilarityTransform true_transform;
  std::uint64_t seed = 0;
};

FixtureBundle make_fixture(const FixtureParams& params);

/// Directory layout: gt_mesh.ply, est_mesh.ply, cameras_gt.json,
/// cameras_est.json, masks/<view name>.pgm, fixture.json.
void write_fixture(const FixtureBundle& bundle, const std::filesystem::path& dir);

} // namespace woundbench
