#pragma once

#include <cstddef>

#include "pss/mesh.hpp"

namespace pss {

struct RepairReport {
  std::size_t welded_vertices = 0;           // vertices removed by merging
  std::size_t split_vertices = 0;            // vertex copies created by splitting
  std::size_t nonmanifold_edges_before = 0;
  std::size_t nonmanifold_edges_after = 0;
  std::size_t degenerate_faces = 0;
};

struct RepairResult {
  TriangleMesh mesh;
  RepairReport report;
};

/// Merges vertices closer than `epsilon` (union-find over a uniform grid of
/// cell size epsilon, 27-cell search). epsilon == 0 merges exact duplicates
/// only. Merged vertices keep the position and color of the lowest original
/// index; surviving vertices keep their relative order. Faces that collapse
/// are kept and flagged degenerate.
RepairResult weld_vertices(const TriangleMesh& mesh, double epsilon);

/// Resolves edges shared by more than two faces, and vertices whose incident
/// faces form several disconnected fans, by duplicating vertices. No face is
/// removed and face order is preserved.
RepairResult repair_nonmanifold(const TriangleMesh& mesh);

/// Number of undirected edges with more than two incident (non-collapsed)
/// faces.
std::size_t count_nonmanifold_edges(const TriangleMesh& mesh);

}  // namespace pss
