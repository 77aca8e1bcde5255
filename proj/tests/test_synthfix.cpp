#include "test_support.hpp"

#include "woundbench/error.hpp"
#include "woundbench/json_format.hpp"
#include "woundbench/projection.hpp"
#include "woundbench/synthfix.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <map>
#include <numbers>

using namespace woundbench;
using namespace wbtest;

namespace {

std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_use(const TriangleMesh& m) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> use;
  for (const Face& f : m.faces()) {
    for (int k = 0; k < 3; ++k) {
      const auto a = f[k];
      const auto b = f[(k + 1) % 3];
      ++use[{std::min(a, b), std::max(a, b)}];
    }
  }
  return use;
}

double total_area(const TriangleMesh& m) {
  double a = 0;
  for (std::size_t f = 0; f < m.face_count(); ++f) {
    a += m.face_area(f);
  }
  return a;
}

std::string dir_digest(const std::filesystem::path& dir) {
  std::string all;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    all += std::filesystem::relative(f, dir).string() + "\n" + read_file(f);
  }
  return all;
}

} // namespace

TEST_CASE("body parts are closed genus-0 surfaces") {
  for (BodyShape shape : {BodyShape::sphere, BodyShape::cylinder}) {
    for (int level = 1; level <= 4; ++level) {
      const TriangleMesh m = gen_body_part(shape, level, 10.0);
      const auto use = edge_use(m);
      for (const auto& [edge, count] : use) {
        CHECK(count == 2);
      }
      const auto chi = static_cast<long>(m.vertex_count()) - static_cast<long>(use.size()) +
          static_cast<long>(m.face_count());
      CHECK(chi == 2);
      CHECK(m.dropped_faces() == 0);
    }
  }
}

TEST_CASE("icosphere counts follow the subdivision recurrence") {
  // V' = V + E, E' = 2E + 3F, F' = 4F from the 12/30/20 icosahedron
  long v = 12;
  long e = 30;
  long f = 20;
  for (int level = 1; level <= 4; ++level) {
    v += e;
    e = 2 * e + 3 * f;
    f *= 4;
    const TriangleMesh m = gen_body_part(BodyShape::sphere, level, 1.0);
    CHECK(static_cast<long>(m.vertex_count()) == v);
    CHECK(static_cast<long>(m.face_count()) == f);
  }
  const TriangleMesh two = gen_body_part(BodyShape::sphere, 2, 1.0);
  CHECK(two.vertex_count() == 162);
  CHECK(two.face_count() == 320);
}

TEST_CASE("sphere vertices sit on the radius and faces point outward") {
  const TriangleMesh m = gen_body_part(BodyShape::sphere, 3, 25.0);
  for (const Vec3& p : m.vertices()) {
    CHECK(std::abs(p.norm() - 25.0) < 1e-9);
  }
  for (std::size_t f = 0; f < m.face_count(); ++f) {
    CHECK(m.face_normal(f).dot(m.face_centroid(f)) > 0.0);
  }
}

TEST_CASE("cylinder area matches the analytic value") {
  const double r = 10.0;
  const double h = 4.0 * r;
  const TriangleMesh m = gen_body_part(BodyShape::cylinder, 3, r);
  const double analytic = 2.0 * std::numbers::pi * r * h + 2.0 * std::numbers::pi * r * r;
  CHECK(std::abs(total_area(m) / analytic - 1.0) <= 0.02);
}

TEST_CASE("gen_body_part validation") {
  CHECK_THROWS_AS(gen_body_part(BodyShape::sphere, 0, 1.0), Error);
  CHECK_THROWS_AS(gen_body_part(BodyShape::sphere, 2, -1.0), Error);
  CHECK(parse_body_shape("cylinder") == BodyShape::cylinder);
  CHECK_THROWS_AS(parse_body_shape("torus"), Error);
}

TEST_CASE("carve_wound") {
  const TriangleMesh body = gen_body_part(BodyShape::sphere, 4, 40.0);
  const Vec3 center = body.vertices()[5];
  const WoundSpec spec{center, 15.0, 5.0};

  SUBCASE("flat wound only labels") {
    const TriangleMesh flat = carve_wound(body, {center, 15.0, 0.0});
    CHECK(flat.vertices() == body.vertices());
    std::size_t expected = 0;
    for (std::size_t i = 0; i < body.vertex_count(); ++i) {
      const bool inside = (body.vertices()[i] - center).norm() < 15.0;
      expected += inside ? 1 : 0;
      CHECK(flat.is_wound(i) == inside);
    }
    CHECK(flat.wound_vertex_count() == expected);
  }

  SUBCASE("bump profile") {
    const TriangleMesh carved = carve_wound(body, spec);
    const auto normals = vertex_normals(body).normals;
    for (std::size_t i = 0; i < body.vertex_count(); ++i) {
      const double r = (body.vertices()[i] - center).norm();
      const Vec3 moved = body.vertices()[i] - carved.vertices()[i];
      if (r >= 15.0) {
        CHECK(moved == Vec3::Zero());
        continue;
      }
      const double s = 1.0 - (r / 15.0) * (r / 15.0);
      CHECK(std::abs(moved.norm() - 5.0 * s * s) < 1e-12);
      CHECK(moved.normalized().dot(normals[i]) > 1.0 - 1e-12);
    }
    CHECK((body.vertices()[5] - carved.vertices()[5]).norm() == doctest::Approx(5.0));
  }

  SUBCASE("errors") {
    const TriangleMesh coarse = gen_body_part(BodyShape::sphere, 1, 40.0);
    CHECK_THROWS_WITH_AS(
        carve_wound(coarse, {coarse.face_centroid(0), 0.5, 1.0}),
        "wound region empty - refine tessellation", Error);
    CHECK_THROWS_AS(carve_wound(body, {Vec3(0, 0, 200), 15.0, 5.0}), Error);
  }
}

TEST_CASE("camera ring geometry") {
  const Vec3 target(3, -4, 40);
  const auto ring = gen_camera_ring(target, 4, 150.0, 30.0, 640, 480, 50.0);
  REQUIRE(ring.size() == 4);
  const double fx = 320.0 / std::tan(25.0 * std::numbers::pi / 180.0);
  for (std::size_t k = 0; k < ring.size(); ++k) {
    const CameraView& cam = ring[k];
    CHECK(cam.name == "view_00" + std::to_string(k));
    CHECK(cam.fx == doctest::Approx(fx));
    CHECK(cam.fy == cam.fx);
    CHECK(cam.cx == 320.0);
    CHECK(cam.cy == 240.0);
    CHECK(std::abs((cam.center() - target).norm() - 150.0) < 1e-9);
    const auto p = project_vertex(cam, target);
    REQUIRE(p);
    CHECK(std::abs(p->u - cam.cx) < 1e-9);
    CHECK(std::abs(p->v - cam.cy) < 1e-9);
    CHECK(std::abs(p->depth - 150.0) < 1e-9);
    const Vec3 offset = cam.center() - target;
    const double az = std::atan2(offset.y(), offset.x()) * 180.0 / std::numbers::pi;
    CHECK(std::abs(std::remainder(az - 90.0 * k, 360.0)) < 1e-9);
  }
}

TEST_CASE("masks of an all-wound mesh equal the silhouette") {
  const TriangleMesh body = gen_body_part(BodyShape::sphere, 3, 20.0);
  const TriangleMesh all = body.with_labels(std::vector<Label>(body.vertex_count(), Label::wound));
  const auto cams = gen_camera_ring(Vec3::Zero(), 3, 100.0, 20.0, 128, 128, 40.0);
  const auto masks = render_gt_masks(all, cams);
  for (std::size_t v = 0; v < cams.size(); ++v) {
    const DepthBuffer buf = rasterize(all, cams[v]);
    CHECK(masks[v].count() == buf.covered());
    CHECK(masks[v].count() > 0);
  }
}

TEST_CASE("camera behind the body sees no wound") {
  const TriangleMesh leg = carve_wound(gen_body_part(BodyShape::cylinder, 4, 40.0), {{0, 0, 40}, 15.0, 5.0});
  const CameraView below = look_at_camera("below", {0, 0, -200}, {0, 0, 0}, 256, 256, 40.0);
  const CameraView above = look_at_camera("above", {0, 0, 200}, {0, 0, 0}, 256, 256, 40.0);
  const auto masks = render_gt_masks(leg, {below, above});
  CHECK(masks[0].count() == 0);
  CHECK(rasterize(leg, below).covered() > 0);
  CHECK(masks[1].count() > 0);
}

TEST_CASE("rendered wound area converges to the projected cap area") {
  // flat wound on a fine sphere: the wound is a spherical cap whose rim circle
  // projects to a circle for a camera on the axis
  const double rho = 40.0;
  const double big_r = 15.0;
  const TriangleMesh body = gen_body_part(BodyShape::sphere, 6, rho);
  const TriangleMesh cap = carve_wound(body, {{0, 0, rho}, big_r, 0.0});
  const double rim_z = rho - big_r * big_r / (2.0 * rho);
  const double rim_radius = big_r * std::sqrt(1.0 - big_r * big_r / (4.0 * rho * rho));
  const double height = 200.0;

  std::map<int, double> ratio;
  for (int res : {512, 1024}) {
    const CameraView cam = look_at_camera("top", {0, 0, height}, {0, 0, 0}, res, res, 20.0);
    const double pixels_radius = cam.fx * rim_radius / (height - rim_z);
    const double analytic = std::numbers::pi * pixels_radius * pixels_radius;
    const double counted = static_cast<double>(render_gt_masks(cap, {cam})[0].count());
    ratio[res] = counted / analytic;
  }
  CHECK(std::abs(ratio[1024] - 1.0) <= 0.03);
  CHECK(std::abs(ratio[1024] / ratio[512] - 1.0) <= 0.05);
  MESSAGE("area ratio 512: " << ratio[512] << " 1024: " << ratio[1024]);
}

TEST_CASE("perturb") {
  const TriangleMesh body = carve_wound(gen_body_part(BodyShape::sphere, 6, 40.0), {{0, 0, 40}, 15.0, 5.0});

  const TriangleMesh same = perturb(body, SimilarityTransform::identity(), 0.0, 1);
  CHECK(same.vertices() == body.vertices());
  CHECK_FALSE(same.has_labels());

  const SimilarityTransform t(1.3, axis_angle_rotation(Vec3(0, 1, 1).normalized(), 0.4), Vec3(10, -5, 3));
  const TriangleMesh moved = perturb(body, t, 0.0, 1);
  for (std::size_t i = 0; i < body.vertex_count(); ++i) {
    CHECK(moved.vertices()[i] == t(body.vertices()[i]));
  }

  REQUIRE(body.vertex_count() >= 10000);
  const TriangleMesh noisy = perturb(body, SimilarityTransform::identity(), 0.1, 7);
  double ss = 0;
  for (std::size_t i = 0; i < body.vertex_count(); ++i) {
    ss += (noisy.vertices()[i] - body.vertices()[i]).squaredNorm();
  }
  const double rms = std::sqrt(ss / body.vertex_count());
  CHECK(std::abs(rms / (0.1 * std::sqrt(3.0)) - 1.0) < 0.05);
  CHECK_THROWS_AS(perturb(body, t, -1.0, 0), Error);
}

TEST_CASE("transform_camera keeps pixels and scales depth") {
  const CameraView cam = look_at_camera("c", {100, 20, 80}, {0, 0, 10}, 320, 240, 50.0);
  const SimilarityTransform t(1.3, axis_angle_rotation(Vec3(1, 2, 3).normalized(), 0.6), Vec3(10, -5, 3));
  const CameraView moved = transform_camera(cam, t);
  CHECK((moved.center() - t(cam.center())).norm() < 1e-9);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const Vec3 p = random_point(rng, -20, 20);
    const auto a = project_vertex(cam, p);
    const auto b = project_vertex(moved, t(p));
    REQUIRE(a);
    REQUIRE(b);
    CHECK(std::abs(a->u - b->u) < 1e-9);
    CHECK(std::abs(a->v - b->v) < 1e-9);
    CHECK(std::abs(b->depth - 1.3 * a->depth) < 1e-9);
  }
}

TEST_CASE("fixture generation is deterministic and complete") {
  FixtureParams p;
  p.level = 3;
  p.views = 4;
  p.resolution = 128;
  p.sigma = 0.05;
  p.seed = 7;
  p.transform = SimilarityTransform(1.3, axis_angle_rotation({0, 0, 1}, 0.4), {10, -5, 3});
  const auto d1 = scratch_dir("fixture_a");
  const auto d2 = scratch_dir("fixture_b");
  write_fixture(make_fixture(p), d1);
  write_fixture(make_fixture(p), d2);
  CHECK(dir_digest(d1) == dir_digest(d2));
  for (const char* f : {"gt_mesh.ply", "est_mesh.ply", "cameras_gt.json", "cameras_est.json", "fixture.json",
                        "masks/view_000.pgm", "masks/view_003.pgm"}) {
    CHECK(std::filesystem::exists(d1 / f));
  }
  const auto doc = nlohmann::json::parse(read_file(d1 / "fixture.json"));
  CHECK(doc["seed"] == 7);
  CHECK(doc["true_transform"]["scale"].get<double>() == 1.3);

  const FixtureBundle b = make_fixture(p);
  CHECK(b.cams.size() == b.masks.size());
  CHECK(b.est_cams.size() == b.cams.size());
  for (std::size_t i = 0; i < b.cams.size(); ++i) {
    CHECK((b.est_cams[i].center() - p.transform(b.cams[i].center())).norm() < 1e-9);
  }
}
