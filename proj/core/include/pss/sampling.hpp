#pragma once

#include <vector>

#include "pss/mesh.hpp"

namespace pss {

struct SurfaceSample {
  Vec3 position;
  Vec3 normal;  // barycentric blend of area-weighted vertex normals, unit length
  Rgb color{0, 0, 0};
  std::int32_t face = -1;
};

/// Uniform area sampling. The total count is round(total_area * density);
/// each face receives floor(area * density) points plus one for the faces
/// with the largest fractional remainders (ties to the lower face id), so the
/// allocation is deterministic. Positions are uniform in barycentric space,
/// drawn from a generator seeded with `seed`.
std::vector<SurfaceSample> sample_points(const TriangleMesh& mesh, double density, std::uint64_t seed);

}  // namespace pss
