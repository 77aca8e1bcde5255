#pragma once

#include "woundbench/mesh.hpp"

#include <cstdint>
#include <vector>

namespace woundbench {

struct SurfaceSample {
  Vec3 point;
  Vec3 normal; ///< unit face normal of `face`
  std::uint32_t face;
};

/// Draws `n` points uniformly by area: faces are picked with probability
/// proportional to area, then a uniform barycentric point inside. Output is a
/// pure function of (mesh, n, seed).
std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

} // namespace woundbench
