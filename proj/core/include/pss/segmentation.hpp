#pragma once

#include <vector>

#include "pss/adjacency.hpp"
#include "pss/mesh.hpp"
#include "pss/plane_fit.hpp"

namespace pss {

enum class SegmentType : std::uint8_t { planar = 0, nonplanar = 1 };

/// Partition of the faces into edge-connected segments.
struct Segmentation {
  std::vector<std::int32_t> face_segment;  // one id per face, 0..count-1
  std::vector<SegmentType> segment_type;
  std::vector<Plane> segment_plane;

  std::size_t size() const { return segment_type.size(); }
};

/// Per-segment faces, vertices and boundary, derived from a segmentation.
/// Boundary edges are mesh edges whose other side is another segment or the
/// mesh border.
struct SegmentTopology {
  std::vector<std::vector<std::int32_t>> faces;
  std::vector<std::vector<std::int32_t>> vertices;           // sorted unique
  std::vector<std::vector<std::int32_t>> boundary_edges;     // indices into adjacency.edges()
  std::vector<std::vector<std::int32_t>> boundary_vertices;  // sorted unique
  std::vector<double> area;
};

SegmentTopology build_segment_topology(const TriangleMesh& mesh, const AdjacencyIndex& adjacency,
                                       const Segmentation& segmentation);

/// Rebuilds a Segmentation from per-face ids, refitting each segment's plane
/// from its vertices. Ids already forming 0..n-1 are kept; anything else is
/// renumbered densely by first occurrence. `types` holds one segment type per
/// face (empty: all planar).
Segmentation segmentation_from_ids(const TriangleMesh& mesh, std::span<const std::int32_t> ids,
                                   std::span<const std::uint8_t> types = {});

/// Validates the partition invariants: every face assigned, ids dense, and
/// each segment edge-connected. Throws InputError on violation.
void check_segmentation(const AdjacencyIndex& adjacency, const Segmentation& segmentation);

/// Reads "segment_id" / "segment_type" face properties written by
/// attach_segmentation.
Segmentation segmentation_from_mesh(const TriangleMesh& mesh);

/// Stores the segmentation as int32 "segment_id" and uchar "segment_type"
/// face properties.
void attach_segmentation(TriangleMesh& mesh, const Segmentation& segmentation);

}  // namespace pss
