#include "test_support.hpp"

#include "woundbench/error.hpp"
#include "woundbench/sampling.hpp"
#include "woundbench/spatial_index.hpp"
#include "woundbench/synthfix.hpp"

#include <doctest.h>

#include <cmath>

using namespace woundbench;
using namespace wbtest;

namespace {

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Plane projection when the foot falls inside, otherwise the best edge.
double triangle_distance_oracle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a).normalized();
  const double h = (p - a).dot(n);
  const Vec3 foot = p - h * n;
  const double s0 = (b - a).cross(foot - a).dot(n);
  const double s1 = (c - b).cross(foot - b).dot(n);
  const double s2 = (a - c).cross(foot - c).dot(n);
  if (s0 >= 0 && s1 >= 0 && s2 >= 0) {
    return std::abs(h);
  }
  return std::min({segment_distance(p, a, b), segment_distance(p, b, c), segment_distance(p, c, a)});
}

double brute_force_distance(const TriangleMesh& m, const Vec3& q) {
  double best = std::numeric_limits<double>::infinity();
  for (const Face& f : m.faces()) {
    best = std::min(best, triangle_distance_oracle(q, m.vertices()[f[0]], m.vertices()[f[1]], m.vertices()[f[2]]));
  }
  return best;
}

SimilarityTransform random_similarity(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> s(0.5, 2.0);
  return {s(rng), random_rotation(rng), random_point(rng, -10, 10)};
}

} // namespace

TEST_CASE("mesh construction validates indices and drops degenerate faces") {
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}};
  CHECK_THROWS_WITH_AS(TriangleMesh(v, {{0, 1, 4}}), "malformed face", Error);
  const TriangleMesh m(v, {{0, 1, 2}, {0, 0, 1}, {0, 1, 3}});
  CHECK(m.face_count() == 1);
  CHECK(m.dropped_faces() == 2);
  CHECK_THROWS_AS(TriangleMesh(v, {{0, 1, 2}}, std::vector<Label>(3)), Error);
}

TEST_CASE("apply_transform identity and pure scaling") {
  const TriangleMesh cube = unit_cube();
  const TriangleMesh same = apply_transform(SimilarityTransform::identity(), cube);
  CHECK(same.vertices() == cube.vertices());
  CHECK(same.faces() == cube.faces());
  const TriangleMesh big = apply_transform(SimilarityTransform(2.0, Mat3::Identity(), Vec3::Zero()), cube);
  CHECK(big.bounds().max - big.bounds().min == Vec3(2, 2, 2));
  CHECK(big.face_count() == cube.face_count());
}

TEST_CASE("apply_transform preserves counts and labels") {
  std::vector<Label> labels(4, Label::background);
  labels[2] = Label::wound;
  const TriangleMesh m = unit_square().with_labels(labels);
  std::mt19937_64 rng(3);
  const TriangleMesh t = apply_transform(random_similarity(rng), m);
  CHECK(t.vertex_count() == m.vertex_count());
  CHECK(t.faces() == m.faces());
  CHECK(*t.labels() == *m.labels());
}

TEST_CASE("compose matches sequential application") {
  std::mt19937_64 rng(11);
  const SimilarityTransform t1 = random_similarity(rng);
  const SimilarityTransform t2 = random_similarity(rng);
  const SimilarityTransform both = compose(t2, t1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = random_point(rng, -50, 50);
    CHECK((both(p) - t2(t1(p))).norm() < 1e-9);
  }
}

TEST_CASE("compose identities") {
  std::mt19937_64 rng(5);
  const SimilarityTransform t = random_similarity(rng);
  const SimilarityTransform a = compose(SimilarityTransform::identity(), t);
  CHECK(a.scale() == doctest::Approx(t.scale()));
  CHECK((a.rotation() - t.rotation()).norm() < 1e-12);
  CHECK((a.translation() - t.translation()).norm() < 1e-12);

  const SimilarityTransform id = compose(t, t.inverse());
  CHECK(std::abs(id.scale() - 1.0) < 1e-9);
  CHECK((id.rotation() - Mat3::Identity()).norm() < 1e-9);
  CHECK(id.translation().norm() < 1e-9);

  const auto tr = [](const Vec3& v) { return SimilarityTransform::rigid(Mat3::Identity(), v); };
  const SimilarityTransform sum = compose(tr({1, 2, 3}), tr({-4, 5, 0.5}));
  CHECK((sum.translation() - Vec3(-3, 7, 3.5)).norm() < 1e-15);
}

TEST_CASE("similarity scales pairwise distances") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const SimilarityTransform t = random_similarity(rng);
    const Vec3 a = random_point(rng, -20, 20);
    const Vec3 b = random_point(rng, -20, 20);
    CHECK(std::abs((t(a) - t(b)).norm() - t.scale() * (a - b).norm()) < 1e-9);
  }
}

TEST_CASE("similarity rejects invalid parameters") {
  CHECK_THROWS_AS(SimilarityTransform(0.0, Mat3::Identity(), Vec3::Zero()), Error);
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1;
  CHECK_THROWS_WITH_AS(SimilarityTransform(1.0, reflect, Vec3::Zero()), "invalid rotation", Error);
}

TEST_CASE("sample_surface single triangle") {
  const TriangleMesh tri({{0, 0, 0}, {2, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  const auto s = sample_surface(tri, 1000, 1);
  REQUIRE(s.size() == 1000);
  for (const auto& p : s) {
    CHECK(p.point.z() == 0.0);
    CHECK(p.point.x() >= 0.0);
    CHECK(p.point.y() >= 0.0);
    CHECK(p.point.x() / 2.0 + p.point.y() <= 1.0 + 1e-12);
    CHECK((p.normal - Vec3(0, 0, 1)).norm() < 1e-12);
    CHECK(std::abs(p.normal.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("sample_surface area proportional") {
  // areas 1.5 and 0.5
  const TriangleMesh m({{0, 0, 0}, {3, 0, 0}, {0, 1, 0}, {10, 0, 0}, {11, 0, 0}, {10, 1, 0}}, {{0, 1, 2}, {3, 4, 5}});
  const auto s = sample_surface(m, 100000, 42);
  double big = 0;
  double small = 0;
  for (const auto& p : s) {
    (p.face == 0 ? big : small) += 1;
  }
  CHECK(std::abs(big / small / 3.0 - 1.0) < 0.02);
}

TEST_CASE("sample_surface deterministic and validated") {
  const TriangleMesh m = gen_body_part(BodyShape::sphere, 2, 10.0);
  const auto a = sample_surface(m, 500, 9);
  const auto b = sample_surface(m, 500, 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].point == b[i].point);
    CHECK(a[i].face == b[i].face);
  }
  CHECK_THROWS_WITH_AS(sample_surface(TriangleMesh(), 10, 0), "empty mesh", Error);
}

TEST_CASE("closest point features") {
  const Vec3 a(0, 0, 0);
  const Vec3 b(1, 0, 0);
  const Vec3 c(0, 1, 0);
  CHECK(closest_point_on_triangle({-1, -1, 0}, a, b, c).feature == TriangleFeature::vertex0);
  CHECK(closest_point_on_triangle({0.5, -1, 0}, a, b, c).feature == TriangleFeature::edge01);
  CHECK(closest_point_on_triangle({0.2, 0.2, 3}, a, b, c).feature == TriangleFeature::interior);
  CHECK(closest_point_on_triangle({0.2, 0.2, 3}, a, b, c).squared_distance == doctest::Approx(9.0));
}

TEST_CASE("nearest_on_surface trivial cases") {
  const TriangleMesh sphere = gen_body_part(BodyShape::sphere, 3, 5.0);
  const SpatialIndex idx(sphere);
  for (std::size_t i = 0; i < sphere.vertex_count(); i += 37) {
    CHECK(nearest_on_surface(idx, sphere.vertices()[i]).distance == 0.0);
  }
  const TriangleMesh big({{-100, -100, 0}, {100, -100, 0}, {0, 100, 0}}, {{0, 1, 2}});
  const SurfaceHit hit = nearest_on_surface(SpatialIndex(big), {1, 2, 7.5});
  CHECK(hit.distance == doctest::Approx(7.5));
  CHECK((hit.point - Vec3(1, 2, 0)).norm() < 1e-12);
  CHECK(std::abs(std::abs(hit.normal.z()) - 1.0) < 1e-12);
}

TEST_CASE("nearest_on_surface matches brute force") {
  const TriangleMesh m = carve_wound(gen_body_part(BodyShape::sphere, 4, 20.0), {{0, 0, 20}, 8.0, 3.0});
  const SpatialIndex idx(m);
  std::mt19937_64 rng(123);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 q = random_point(rng, -30, 30);
    const SurfaceHit hit = idx.nearest(q);
    CHECK(std::abs(hit.distance - brute_force_distance(m, q)) <= 1e-12);
    CHECK(std::abs((q - hit.point).norm() - hit.distance) < 1e-12);
    const Face& f = m.faces()[hit.face];
    CHECK(
        triangle_distance_oracle(q, m.vertices()[f[0]], m.vertices()[f[1]], m.vertices()[f[2]]) ==
        doctest::Approx(hit.distance).epsilon(1e-9));
  }
}

TEST_CASE("nearest distance never exceeds distance to any sampled surface point") {
  const TriangleMesh m = gen_body_part(BodyShape::cylinder, 2, 10.0);
  const SpatialIndex idx(m);
  const auto samples = sample_surface(m, 2000, 4);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const Vec3 q = random_point(rng, -30, 30);
    const double d = idx.nearest(q).distance;
    for (const auto& s : samples) {
      CHECK_FALSE(d > (q - s.point).norm() + 1e-12);
    }
  }
  double sum = 0;
  for (const auto& s : samples) {
    sum += idx.nearest(s.point).distance;
  }
  CHECK(sum / samples.size() < 1e-12);
}

TEST_CASE("PointIndex nearest and radius queries") {
  std::mt19937_64 rng(2);
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i) {
    pts.push_back(random_point(rng, -1, 1));
  }
  const PointIndex idx(pts);
  for (int i = 0; i < 200; ++i) {
    const Vec3 q = random_point(rng, -1.5, 1.5);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : pts) {
      best = std::min(best, (p - q).norm());
    }
    CHECK(idx.nearest(q).distance == best);
    CHECK(idx.any_within(q, best));
    CHECK_FALSE(idx.any_within(q, best * 0.999));
  }
  CHECK(idx.any_within(pts[17], 0.0));
}

TEST_CASE("vertex normals") {
  const TriangleMesh plane = grid(4, 1.0);
  for (const Vec3& n : vertex_normals(plane).normals) {
    CHECK((n - Vec3(0, 0, 1)).norm() < 1e-12);
  }

  const TriangleMesh sphere = gen_body_part(BodyShape::sphere, 3, 1.0);
  const auto normals = vertex_normals(sphere).normals;
  for (std::size_t i = 0; i < sphere.vertex_count(); ++i) {
    CHECK(normals[i].dot(sphere.vertices()[i].normalized()) > 0.99);
  }

  // corner 0 touches one triangle on each of three orthogonal sides
  TriangleMesh cube = unit_cube();
  const auto cube_normals = vertex_normals(cube).normals;
  Vec3 expected = Vec3::Zero();
  for (std::size_t f = 0; f < cube.face_count(); ++f) {
    const Face& face = cube.faces()[f];
    if (face[0] == 0 || face[1] == 0 || face[2] == 0) {
      expected += cube.face_area(f) * cube.face_normal(f);
    }
  }
  CHECK((cube_normals[0] - expected.normalized()).norm() < 1e-12);
  CHECK(std::abs(std::abs(cube_normals[0].x()) - 1.0 / std::sqrt(3.0)) < 1e-12);
  CHECK(std::abs(std::abs(cube_normals[0].y()) - 1.0 / std::sqrt(3.0)) < 1e-12);
  CHECK(std::abs(std::abs(cube_normals[0].z()) - 1.0 / std::sqrt(3.0)) < 1e-12);

  const TriangleMesh loose({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 5}}, {{0, 1, 2}});
  const auto vn = vertex_normals(loose);
  REQUIRE(vn.isolated.size() == 1);
  CHECK(vn.isolated[0] == 3);
  CHECK(vn.normals[3] == Vec3::Zero());
}
