#include "woundbench/synthfix.hpp"

#include "woundbench/error.hpp"
#include "woundbench/json_format.hpp"
#include "woundbench/mesh_io.hpp"
#include "woundbench/projection.hpp"
#include "woundbench/spatial_index.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace woundbench {

BodyShape parse_body_shape(const std::string& name) {
  if (name == "sphere") {
    return BodyShape::sphere;
  }
  if (name == "cylinder") {
    return BodyShape::cylinder;
  }
  throw input_error("unknown shape " + name + " (expected sphere or cylinder)");
}

std::string to_string(BodyShape shape) {
  return shape == BodyShape::sphere ? "sphere" : "cylinder";
}

namespace {

// Flips faces whose normal points against `outward(face centroid)`.
template <typename Outward>
void orient_faces(const std::vector<Vec3>& v, std::vector<Face>& faces, Outward outward) {
  for (Face& f : faces) {
    const Vec3 n = (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]);
    const Vec3 c = (v[f[0]] + v[f[1]] + v[f[2]]) / 3.0;
    if (n.dot(outward(c)) < 0.0) {
      std::swap(f[1], f[2]);
    }
  }
}

TriangleMesh icosphere(int level, double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v{
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : v) {
    p.normalize();
  }
  std::vector<Face> faces{
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoints.find(key);
      if (it != midpoints.end()) {
        return it->second;
      }
      const auto id = static_cast<std::uint32_t>(v.size());
      v.push_back((v[a] + v[b]).normalized());
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const std::uint32_t ab = midpoint(f[0], f[1]);
      const std::uint32_t bc = midpoint(f[1], f[2]);
      const std::uint32_t ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  for (Vec3& p : v) {
    p *= radius;
  }
  orient_faces(v, faces, [](const Vec3& c) { return c; });
  return TriangleMesh(std::move(v), std::move(faces));
}

TriangleMesh tube(int level, double radius) {
  const int n = 8 << level;
  const int rings = 8 << level;
  const double half = 2.0 * radius;
  std::vector<Vec3> v;
  v.reserve(static_cast<std::size_t>((rings + 1) * n + 2));
  for (int j = 0; j <= rings; ++j) {
    const double x = -half + 2.0 * half * j / rings;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n;
      v.emplace_back(x, radius * std::cos(a), radius * std::sin(a));
    }
  }
  const auto ring_vertex = [n](int j, int i) { return static_cast<std::uint32_t>(j * n + (i % n)); };
  std::vector<Face> faces;
  for (int j = 0; j < rings; ++j) {
    for (int i = 0; i < n; ++i) {
      faces.push_back({ring_vertex(j, i), ring_vertex(j, i + 1), ring_vertex(j + 1, i + 1)});
      faces.push_back({ring_vertex(j, i), ring_vertex(j + 1, i + 1), ring_vertex(j + 1, i)});
    }
  }
  orient_faces(v, faces, [](const Vec3& c) { return Vec3(0.0, c.y(), c.z()); });

  const auto cap_lo = static_cast<std::uint32_t>(v.size());
  v.emplace_back(-half, 0.0, 0.0);
  const auto cap_hi = static_cast<std::uint32_t>(v.size());
  v.emplace_back(half, 0.0, 0.0);
  std::vector<Face> caps;
  for (int i = 0; i < n; ++i) {
    caps.push_back({cap_lo, ring_vertex(0, i), ring_vertex(0, i + 1)});
    caps.push_back({cap_hi, ring_vertex(rings, i), ring_vertex(rings, i + 1)});
  }
  orient_faces(v, caps, [](const Vec3& c) { return Vec3(c.x(), 0.0, 0.0); });
  faces.insert(faces.end(), caps.begin(), caps.end());
  return TriangleMesh(std::move(v), std::move(faces));
}

} // namespace

TriangleMesh gen_body_part(BodyShape shape, int level, double size) {
  if (level < 1) {
    throw input_error("tessellation level must be at least 1");
  }
  if (level > 10) {
    throw input_error("tessellation level too large");
  }
  if (!(size > 0.0)) {
    throw input_error("body size must be positive");
  }
  return shape == BodyShape::sphere ? icosphere(level, size) : tube(level, size);
}

TriangleMesh carve_wound(const TriangleMesh& mesh, const WoundSpec& spec) {
  if (!(spec.radius > 0.0) || !(spec.depth >= 0.0)) {
    throw input_error("wound radius must be positive and depth non-negative");
  }
  const SpatialIndex index(mesh);
  if (index.nearest(spec.center).distance > 2.0 * spec.radius) {
    throw input_error("wound center is farther than 2R from the surface");
  }
  const VertexNormals normals = vertex_normals(mesh);
  std::vector<Vec3> vertices = mesh.vertices();
  std::vector<Label> labels(vertices.size(), Label::background);
  std::size_t wound = 0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const double r = (mesh.vertices()[i] - spec.center).norm();
    if (!(r < spec.radius)) {
      continue;
    }
    labels[i] = Label::wound;
    ++wound;
    const double s = 1.0 - (r / spec.radius) * (r / spec.radius);
    vertices[i] -= spec.depth * s * s * normals.normals[i];
  }
  if (wound == 0) {
    throw input_error("wound region empty - refine tessellation");
  }
  return TriangleMesh(std::move(vertices), mesh.faces(), std::move(labels));
}

CameraView look_at_camera(
    const std::string& name, const Vec3& center, const Vec3& target, int width, int height, double fov_deg) {
  const Vec3 forward = (target - center).normalized();
  Vec3 up(0.0, 0.0, 1.0);
  if (forward.cross(up).norm() < 1e-9) {
    up = Vec3(0.0, 1.0, 0.0);
  }
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  CameraView cam;
  cam.name = name;
  cam.width = width;
  cam.height = height;
  cam.fx = (width / 2.0) / std::tan(fov_deg * std::numbers::pi / 360.0);
  cam.fy = cam.fx;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -(cam.rotation * center);
  return cam;
}

std::vector<CameraView> gen_camera_ring(
    const Vec3& target,
    int count,
    double ring_radius,
    double elevation_deg,
    int width,
    int height,
    double fov_deg) {
  if (count < 1) {
    throw input_error("camera count must be at least 1");
  }
  if (!(ring_radius > 0.0) || width <= 0 || height <= 0 || !(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw input_error("invalid camera ring parameters");
  }
  const double el = elevation_deg * std::numbers::pi / 180.0;
  std::vector<CameraView> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double az = 2.0 * std::numbers::pi * k / count;
    const Vec3 center =
        target + ring_radius * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    char name[32];
    std::snprintf(name, sizeof(name), "view_%03d", k);
    out.push_back(look_at_camera(name, center, target, width, height, fov_deg));
  }
  return out;
}

std::vector<BinaryMask2D> render_gt_masks(const TriangleMesh& mesh, const std::vector<CameraView>& cams) {
  if (!mesh.has_labels()) {
    throw input_error("mesh has no labels");
  }
  std::vector<std::uint8_t> wound_face(mesh.face_count(), 0);
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces()[f];
    const int n = static_cast<int>(mesh.is_wound(face[0])) + static_cast<int>(mesh.is_wound(face[1])) +
        static_cast<int>(mesh.is_wound(face[2]));
    wound_face[f] = n >= 2 ? 1 : 0;
  }
  std::vector<BinaryMask2D> out;
  out.reserve(cams.size());
  for (const CameraView& cam : cams) {
    const DepthBuffer buf = rasterize(mesh, cam);
    BinaryMask2D mask(cam.width, cam.height);
    for (std::size_t i = 0; i < buf.face_id.size(); ++i) {
      const std::uint32_t f = buf.face_id[i];
      mask.pixels[i] = (f != kEmptyPixel && wound_face[f] != 0) ? 1 : 0;
    }
    out.push_back(std::move(mask));
  }
  return out;
}

TriangleMesh perturb(const TriangleMesh& mesh, const SimilarityTransform& t, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) {
    throw input_error("sigma must be non-negative");
  }
  std::vector<Vec3> vertices;
  vertices.reserve(mesh.vertex_count());
  for (const Vec3& p : mesh.vertices()) {
    vertices.push_back(t(p));
  }
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (Vec3& p : vertices) {
      for (int k = 0; k < 3; ++k) {
        p[k] += noise(rng);
      }
    }
  }
  return TriangleMesh(std::move(vertices), mesh.faces());
}

CameraView transform_camera(const CameraView& cam, const SimilarityTransform& t) {
  CameraView out = cam;
  const Vec3 center = t(cam.center());
  out.rotation = cam.rotation * t.rotation().transpose();
  out.translation = -(out.rotation * center);
  return out;
}

FixtureBundle make_fixture(const FixtureParams& params) {
  FixtureBundle b;
  b.params = params;
  b.seed = params.seed;
  b.true_transform = params.transform;
  b.wound.center = params.wound_center.value_or(Vec3(0.0, 0.0, params.size));
  b.wound.radius = params.wound_radius;
  b.wound.depth = params.wound_depth;

  b.gt_mesh = carve_wound(gen_body_part(params.shape, params.level, params.size), b.wound);
  b.cams = gen_camera_ring(
      b.wound.center, params.views, params.ring_radius, params.elevation_deg, params.resolution, params.resolution,
      params.fov_deg);
  b.masks = render_gt_masks(b.gt_mesh, b.cams);
  b.est_mesh = perturb(b.gt_mesh, params.transform, params.sigma, params.seed);
  b.est_cams.reserve(b.cams.size());
  for (const CameraView& cam : b.cams) {
    b.est_cams.push_back(transform_camera(cam, params.transform));
  }
  return b;
}

namespace {

nlohmann::json vec_json(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

nlohmann::json mat_json(const Mat3& m) {
  nlohmann::json out = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out.push_back(m(r, c));
    }
  }
  return out;
}

} // namespace

void write_fixture(const FixtureBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "masks");
  save_mesh(bundle.gt_mesh, dir / "gt_mesh.ply");
  save_mesh(bundle.est_mesh, dir / "est_mesh.ply");
  save_cameras(bundle.cams, dir / "cameras_gt.json");
  save_cameras(bundle.est_cams, dir / "cameras_est.json");
  for (std::size_t i = 0; i < bundle.masks.size(); ++i) {
    save_mask(bundle.masks[i], dir / "masks" / (bundle.cams[i].name + ".pgm"));
  }
  const FixtureParams& p = bundle.params;
  const SimilarityTransform& t = bundle.true_transform;
  const nlohmann::json doc = {
      {"shape", to_string(p.shape)},
      {"level", p.level},
      {"size", p.size},
      {"wound", {{"center", vec_json(bundle.wound.center)}, {"radius", bundle.wound.radius}, {"depth", bundle.wound.depth}}},
      {"views", p.views},
      {"resolution", p.resolution},
      {"fov_deg", p.fov_deg},
      {"ring_radius", p.ring_radius},
      {"elevation_deg", p.elevation_deg},
      {"sigma", p.sigma},
      {"seed", bundle.seed},
      {"true_transform",
       {{"scale", t.scale()}, {"rotation", mat_json(t.rotation())}, {"translation", vec_json(t.translation())}}},
      {"gt_vertices", bundle.gt_mesh.vertex_count()},
      {"gt_faces", bundle.gt_mesh.face_count()},
      {"gt_wound_vertices", bundle.gt_mesh.wound_vertex_count()},
  };
  write_file_atomic(dir / "fixture.json", format_json(doc));
}

} // namespace woundbench
