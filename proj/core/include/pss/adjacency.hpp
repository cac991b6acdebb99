#pragma once

#include <array>
#include <span>
#include <vector>

#include "pss/mesh.hpp"

namespace pss {

/// Undirected mesh edge. v0 < v1; f1 == -1 on the mesh border.
struct MeshEdge {
  std::int32_t v0 = -1;
  std::int32_t v1 = -1;
  std::int32_t f0 = -1;
  std::int32_t f1 = -1;
  double length = 0.0;
};

/// Face/vertex/edge connectivity of a repaired mesh. Immutable once built.
///
/// face_neighbors(f)[k] is the face across the edge (v[k], v[k+1]) of f, or -1.
/// Faces that repeat a vertex index take part in no edge.
class AdjacencyIndex {
 public:
  AdjacencyIndex() = default;

  /// Throws TopologyError if an edge has more than two incident faces.
  static AdjacencyIndex build(const TriangleMesh& mesh);

  std::size_t num_vertices() const { return ring_offsets_.empty() ? 0 : ring_offsets_.size() - 1; }
  std::size_t num_faces() const { return face_neighbors_.size(); }

  const std::array<std::int32_t, 3>& face_neighbors(std::size_t f) const { return face_neighbors_[f]; }
  const std::array<std::int32_t, 3>& face_edges(std::size_t f) const { return face_edges_[f]; }
  std::span<const std::int32_t> vertex_neighbors(std::size_t v) const {
    return {ring_.data() + ring_offsets_[v], ring_.data() + ring_offsets_[v + 1]};
  }
  const std::vector<MeshEdge>& edges() const { return edges_; }

 private:
  std::vector<std::array<std::int32_t, 3>> face_neighbors_;
  std::vector<std::array<std::int32_t, 3>> face_edges_;
  std::vector<MeshEdge> edges_;
  std::vector<std::int32_t> ring_;
  std::vector<std::size_t> ring_offsets_;
};

/// Connected components of same-label faces. Faces with label < 0 get -1.
/// Component ids are numbered in order of each component's lowest face id.
std::vector<std::int32_t> face_connected_components(const AdjacencyIndex& adjacency,
                                                    std::span<const std::int32_t> labels);

inline std::size_t component_count(std::span<const std::int32_t> components) {
  std::int32_t m = -1;
  for (auto c : components) m = std::max(m, c);
  return static_cast<std::size_t>(m + 1);
}

/// Vertices within graph distance k of v (v included), sorted ascending.
std::vector<std::int32_t> k_ring_vertices(const AdjacencyIndex& adjacency, std::int32_t v, int k);

}  // namespace pss
