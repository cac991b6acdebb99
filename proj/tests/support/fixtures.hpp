#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "pss/adjacency.hpp"
#include "pss/mesh.hpp"

namespace pss::testing {

inline TriangleMesh make_mesh(std::vector<Vec3> vertices, std::vector<Face> faces) {
  TriangleMesh m;
  m.vertices = std::move(vertices);
  m.faces = std::move(faces);
  m.update_geometry();
  return m;
}

/// nx x ny grid of unit quads in the plane z, two triangles per quad.
/// Face index of quad (i, j) is 2 * (j * nx + i) and 2 * (j * nx + i) + 1.
inline TriangleMesh grid_mesh(int nx, int ny, double cell = 1.0, double z = 0.0) {
  std::vector<Vec3> v;
  std::vector<Face> f;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) v.emplace_back(i * cell, j * cell, z);
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return make_mesh(std::move(v), std::move(f));
}

/// Appends `b` to `a` (indices shifted).
inline TriangleMesh merge(const TriangleMesh& a, const TriangleMesh& b) {
  TriangleMesh m;
  m.vertices = a.vertices;
  m.vertices.insert(m.vertices.end(), b.vertices.begin(), b.vertices.end());
  m.faces = a.faces;
  const auto off = static_cast<std::int32_t>(a.vertices.size());
  for (auto f : b.faces) m.faces.push_back({f[0] + off, f[1] + off, f[2] + off});
  m.update_geometry();
  return m;
}

/// Face pairs sharing an undirected edge, by O(F^2) scan.
inline std::set<std::pair<int, int>> brute_face_adjacency(const TriangleMesh& m) {
  std::set<std::pair<int, int>> out;
  auto edges_of = [&](std::size_t f) {
    std::set<std::pair<int, int>> e;
    for (int k = 0; k < 3; ++k) {
      int a = m.faces[f][k], b = m.faces[f][(k + 1) % 3];
      if (a == b) continue;
      e.emplace(std::min(a, b), std::max(a, b));
    }
    return e;
  };
  for (std::size_t f = 0; f < m.num_faces(); ++f)
    for (std::size_t g = f + 1; g < m.num_faces(); ++g) {
      const auto ef = edges_of(f), eg = edges_of(g);
      for (const auto& e : ef)
        if (eg.count(e)) {
          out.emplace(static_cast<int>(f), static_cast<int>(g));
          break;
        }
    }
  return out;
}

inline std::set<std::pair<int, int>> index_face_adjacency(const AdjacencyIndex& adj) {
  std::set<std::pair<int, int>> out;
  for (std::size_t f = 0; f < adj.num_faces(); ++f)
    for (auto g : adj.face_neighbors(f))
      if (g >= 0) out.emplace(std::min<int>(f, g), std::max<int>(f, g));
  return out;
}

}  // namespace pss::testing

namespace pss::testing {

/// Segments = connected faces sharing the class label and the dominant axis
/// direction of their normal. On the synthetic tile this yields one segment
/// per wall, roof and ground piece.
inline std::vector<std::int32_t> label_normal_segments(const TriangleMesh& m, const AdjacencyIndex& adj) {
  std::vector<std::int32_t> key(m.num_faces());
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    int axis = 0;
    m.face_normal[f].cwiseAbs().maxCoeff(&axis);
    const int dir = axis * 2 + (m.face_normal[f][axis] < 0 ? 1 : 0);
    key[f] = (m.has_labels() ? m.face_label[f] : 0) * 8 + dir;
  }
  return face_connected_components(adj, key);
}

}  // namespace pss::testing
