#pragma once

#include <array>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "pss/common.hpp"

namespace pss::testing {

/// Delaunay edges of points in general position by brute force: a
/// tetrahedron is Delaunay iff no other point lies inside its circumsphere.
inline std::set<std::array<int, 2>> brute_delaunay_edges(const std::vector<Vec3>& p) {
  using M = Eigen::Matrix<long double, 3, 3>;
  using V = Eigen::Matrix<long double, 3, 1>;
  const int n = static_cast<int>(p.size());
  std::set<std::array<int, 2>> edges;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        for (int d = c + 1; d < n; ++d) {
          const V pa = p[a].cast<long double>();
          M A;
          V rhs;
          const int ids[3] = {b, c, d};
          for (int k = 0; k < 3; ++k) {
            const V q = p[ids[k]].cast<long double>();
            A.row(k) = 2 * (q - pa).transpose();
            rhs[k] = q.squaredNorm() - pa.squaredNorm();
          }
          if (std::abs(A.determinant()) < 1e-12L) continue;
          const V center = A.partialPivLu().solve(rhs);
          const long double r2 = (center - pa).squaredNorm();
          bool empty = true;
          for (int e = 0; e < n && empty; ++e) {
            if (e == a || e == b || e == c || e == d) continue;
            if ((p[e].cast<long double>() - center).squaredNorm() < r2 * (1 - 1e-12L)) empty = false;
          }
          if (!empty) continue;
          const int t[4] = {a, b, c, d};
          for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) edges.insert({t[i], t[j]});
        }
  return edges;
}

}  // namespace pss::testing
