#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pss/common.hpp"

namespace pss {

/// Sign of det[a-d, b-d, c-d]: positive when d lies below the plane through
/// a, b, c oriented counter-clockwise. Exact (floating filter, rational
/// fallback).
int orient3d_sign(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Positive when e lies strictly inside the sphere through a, b, c, d, given
/// orient3d_sign(a, b, c, d) > 0. Exact.
int insphere_sign(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e);

/// True when no four of the points span a tetrahedron (exact test).
bool all_coplanar(std::span<const Vec3> points);

struct DelaunayParams {
  /// Each coordinate is displaced by up to +-0.5 * perturbation * bbox
  /// diagonal, from a hash of the point index, to break exact degeneracies.
  /// 0 disables it.
  double perturbation = 1e-9;
  std::uint64_t seed = 0;
};

struct Delaunay3 {
  std::vector<std::array<std::int32_t, 4>> tetrahedra;  // positively oriented
  std::vector<std::array<std::int32_t, 2>> edges;       // i < j, sorted
};

/// Incremental (Bowyer-Watson) 3D Delaunay triangulation with an infinite
/// vertex closing the convex hull. Throws InputError when the points are all
/// coplanar.
Delaunay3 delaunay_3d(std::span<const Vec3> points, const DelaunayParams& params = {});

}  // namespace pss
