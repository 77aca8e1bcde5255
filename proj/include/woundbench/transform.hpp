#pragma once

#include "woundbench/mesh.hpp"

namespace woundbench {

/// x -> scale * rotation * x + translation, with scale > 0 and rotation a
/// proper rotation (orthonormal, det +1).
class SimilarityTransform {
 public:
  /// Identity.
  SimilarityTransform();
  /// Throws an input error when scale <= 0 or rotation is not a proper
  /// rotation within 1e-9.
  SimilarityTransform(double scale, const Mat3& rotation, const Vec3& translation);

  static SimilarityTransform identity() { return {}; }
  static SimilarityTransform rigid(const Mat3& rotation, const Vec3& translation) {
    return {1.0, rotation, translation};
  }

  double scale() const { return scale_; }
  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 operator()(const Vec3& p) const { return scale_ * (rotation_ * p) + translation_; }

  SimilarityTransform inverse() const;

 private:
  double scale_;
  Mat3 rotation_;
  Vec3 translation_;
};

/// Applies `inner` first, then `outer`.
SimilarityTransform compose(const SimilarityTransform& outer, const SimilarityTransform& inner);

TriangleMesh apply_transform(const SimilarityTransform& t, const TriangleMesh& mesh);

bool is_rotation(const Mat3& r, double tol);

/// Right-handed rotation by `radians` about `axis` (need not be unit length).
Mat3 axis_angle_rotation(const Vec3& axis, double radians);

} // namespace woundbench
