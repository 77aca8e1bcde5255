#include "woundbench/transform.hpp"

#include "woundbench/error.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace woundbench {

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) {
    return false;
  }
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

SimilarityTransform::SimilarityTransform()
    : scale_(1.0), rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

SimilarityTransform::SimilarityTransform(double scale, const Mat3& rotation, const Vec3& translation)
    : scale_(scale), rotation_(rotation), translation_(translation) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw input_error("similarity scale must be positive");
  }
  if (!is_rotation(rotation, 1e-9)) {
    throw input_error("invalid rotation");
  }
  if (!translation.allFinite()) {
    throw input_error("non-finite translation");
  }
}

SimilarityTransform SimilarityTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  const double inv_scale = 1.0 / scale_;
  return {inv_scale, rt, -inv_scale * (rt * translation_)};
}

SimilarityTransform compose(const SimilarityTransform& outer, const SimilarityTransform& inner) {
  return {
      outer.scale() * inner.scale(),
      outer.rotation() * inner.rotation(),
      outer.scale() * (outer.rotation() * inner.translation()) + outer.translation()};
}

TriangleMesh apply_transform(const SimilarityTransform& t, const TriangleMesh& mesh) {
  std::vector<Vec3> vertices;
  vertices.reserve(mesh.vertex_count());
  for (const Vec3& p : mesh.vertices()) {
    vertices.push_back(t(p));
  }
  return TriangleMesh(std::move(vertices), mesh.faces(), mesh.labels(), mesh.colors());
}

Mat3 axis_angle_rotation(const Vec3& axis, double radians) {
  return Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
}

} // namespace woundbench
