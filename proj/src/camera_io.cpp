#include "woundbench/camera.hpp"

#include "woundbench/error.hpp"
#include "woundbench/json_format.hpp"
#include "woundbench/transform.hpp"

#include <cmath>

namespace woundbench {

using nlohmann::json;

void validate_camera(const CameraView& cam) {
  if (cam.width <= 0 || cam.height <= 0) {
    throw input_error("invalid image size for view " + cam.name);
  }
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) {
    throw input_error("invalid focal length for view " + cam.name);
  }
  if (!(cam.cx >= 0.0 && cam.cx < cam.width) || !(cam.cy >= 0.0 && cam.cy < cam.height)) {
    throw input_error("invalid principal point for view " + cam.name);
  }
  if (!is_rotation(cam.rotation, 1e-6)) {
    throw input_error("invalid rotation");
  }
  if (!cam.translation.allFinite()) {
    throw input_error("invalid translation for view " + cam.name);
  }
}

std::optional<Projection> project_vertex(const CameraView& cam, const Vec3& world) {
  const Vec3 pc = cam.to_camera(world);
  if (!(pc.z() > 0.0)) {
    return std::nullopt;
  }
  return Projection{cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy, pc.z()};
}

namespace {

const json& require(const json& view, const char* key, std::size_t index) {
  if (!view.is_object() || !view.contains(key)) {
    throw input_error("missing key " + std::string(key) + " in view " + std::to_string(index));
  }
  return view.at(key);
}

template <typename T>
T number(const json& view, const char* key, std::size_t index) {
  const json& v = require(view, key, index);
  if (!v.is_number()) {
    throw input_error("key " + std::string(key) + " in view " + std::to_string(index) + " is not a number");
  }
  return v.get<T>();
}

std::vector<double> numbers(const json& view, const char* key, std::size_t index, std::size_t count) {
  const json& v = require(view, key, index);
  if (!v.is_array() || v.size() != count) {
    throw input_error(
        "key " + std::string(key) + " in view " + std::to_string(index) + " must hold " + std::to_string(count) +
        " numbers");
  }
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) {
      throw input_error("key " + std::string(key) + " in view " + std::to_string(index) + " is not numeric");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

} // namespace

std::vector<CameraView> parse_cameras(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("camera file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("views") || !doc["views"].is_array()) {
    throw input_error("missing key views");
  }
  std::vector<CameraView> out;
  const json& views = doc["views"];
  for (std::size_t i = 0; i < views.size(); ++i) {
    const json& v = views[i];
    CameraView cam;
    const json& name = require(v, "name", i);
    if (!name.is_string()) {
      throw input_error("key name in view " + std::to_string(i) + " is not a string");
    }
    cam.name = name.get<std::string>();
    cam.width = number<int>(v, "width", i);
    cam.height = number<int>(v, "height", i);
    cam.fx = number<double>(v, "fx", i);
    cam.fy = number<double>(v, "fy", i);
    cam.cx = number<double>(v, "cx", i);
    cam.cy = number<double>(v, "cy", i);
    const auto r = numbers(v, "rotation", i, 9);
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        cam.rotation(row, col) = r[static_cast<std::size_t>(row * 3 + col)];
      }
    }
    const auto t = numbers(v, "translation", i, 3);
    cam.translation = Vec3(t[0], t[1], t[2]);
    validate_camera(cam);
    out.push_back(std::move(cam));
  }
  return out;
}

std::string serialize_cameras(const std::vector<CameraView>& views) {
  json arr = json::array();
  for (const CameraView& cam : views) {
    json r = json::array();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        r.push_back(cam.rotation(row, col));
      }
    }
    arr.push_back({
        {"name", cam.name},
        {"width", cam.width},
        {"height", cam.height},
        {"fx", cam.fx},
        {"fy", cam.fy},
        {"cx", cam.cx},
        {"cy", cam.cy},
        {"rotation", r},
        {"translation", {cam.translation.x(), cam.translation.y(), cam.translation.z()}},
    });
  }
  return format_json(json{{"views", arr}});
}

std::vector<CameraView> load_cameras(const std::filesystem::path& path) {
  return parse_cameras(read_file(path));
}

void save_cameras(const std::vector<CameraView>& views, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_cameras(views));
}

} // namespace woundbench
