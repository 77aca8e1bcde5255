#include "woundbench/sampling.hpp"

#include "woundbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace woundbench {

std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) {
    throw input_error("empty mesh");
  }
  if (n == 0) {
    throw input_error("sample count must be positive");
  }
  const std::size_t nf = mesh.face_count();
  std::vector<double> cumulative(nf);
  std::vector<Vec3> normals(nf);
  double total = 0.0;
  for (std::size_t f = 0; f < nf; ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
    normals[f] = mesh.face_normal(f);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& v = mesh.vertices();
  std::vector<SurfaceSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = unit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const std::size_t f = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), nf - 1);
    const double r1 = std::sqrt(unit(rng));
    const double r2 = unit(rng);
    const Face& face = mesh.faces()[f];
    const Vec3 p = (1.0 - r1) * v[face[0]] + r1 * (1.0 - r2) * v[face[1]] + r1 * r2 * v[face[2]];
    out.push_back({p, normals[f], static_cast<std::uint32_t>(f)});
  }
  return out;
}

} // namespace woundbench
