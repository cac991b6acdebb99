#pragma once

#include <vector>

#include "pss/adjacency.hpp"
#include "pss/feature_table.hpp"
#include "pss/mesh.hpp"
#include "pss/segmentation.hpp"

namespace pss {

/// Shape descriptors of one segment.
struct ShapeFeatures {
  double compactness = 0.0;         // 4 pi A / C^2, clamped to (0, 1]
  double shape_index = 0.0;         // C / A^(1/4)
  double straightness = 0.0;        // mean over boundary loops of l2 / l1 of a 3D line fit
  double avg_plane_distance = 0.0;  // mean vertex distance to the TLS plane
  double area = 0.0;
  double circumference = 0.0;
  double vertical_extent = 0.0;
};

ShapeFeatures segment_shape(const TriangleMesh& mesh, const AdjacencyIndex& adjacency,
                            const SegmentTopology& topology, std::size_t segment, const Plane& plane);

/// Splits a set of boundary edges into chains: closed loops where every
/// vertex has exactly two boundary edges, open chains elsewhere. Each chain
/// is returned as its ordered vertex list.
std::vector<std::vector<std::int32_t>> boundary_chains(const AdjacencyIndex& adjacency,
                                                       std::span<const std::int32_t> edges);

constexpr int kHsvBins = 5;

std::vector<std::string> segment_feature_names(const std::vector<std::string>& face_feature_names);

/// Per-segment feature vectors: area-weighted mean and standard deviation of
/// every face channel, shape descriptors, a 5x5x5 area-weighted HSV
/// histogram (L1-normalized; all zero when the mesh has no color), area,
/// circumference and vertical extent. Throws InputError naming the segment
/// when a segment has zero area.
FeatureTable compute_segment_features(const TriangleMesh& mesh, const AdjacencyIndex& adjacency,
                                      const Segmentation& segmentation, const FeatureTable& face_features);

}  // namespace pss
