#pragma once

#include "woundbench/mesh.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace woundbench {

/// Distortion-free pinhole camera.
///
/// Convention: x_cam = rotation * x_world + translation, the camera looks down
/// +z, and a camera-frame point (X, Y, Z) lands on pixel coordinates
/// (fx * X / Z + cx, fy * Y / Z + cy). Integer pixel (col, row) covers
/// [col, col + 1) x [row, row + 1), so its center is (col + 0.5, row + 0.5).
struct CameraView {
  std::string name;
  int width = 0;
  int height = 0;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  /// -R^T t
  Vec3 center() const { return -(rotation.transpose() * translation); }

  bool operator==(const CameraView&) const = default;
};

/// Throws an input error naming the violated invariant.
void validate_camera(const CameraView& cam);

struct Projection {
  double u;
  double v;
  double depth; ///< camera-frame Z (mm)
};

/// Pinhole projection; nullopt when the point is at or behind the camera
/// plane (Z <= 0).
std::optional<Projection> project_vertex(const CameraView& cam, const Vec3& world);

/// JSON rig: { "views": [ { "name", "width", "height", "fx", "fy", "cx", "cy",
/// "rotation": [9, row-major world-to-camera], "translation": [3] } ] }
std::vector<CameraView> load_cameras(const std::filesystem::path& path);
void save_cameras(const std::vector<CameraView>& views, const std::filesystem::path& path);

std::vector<CameraView> parse_cameras(const std::string& text);
std::string serialize_cameras(const std::vector<CameraView>& views);

} // namespace woundbench
