#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pss/adjacency.hpp"
#include "pss/feature_table.hpp"
#include "pss/mesh.hpp"
#include "pss/sampling.hpp"
#include "pss/segmentation.hpp"

namespace pss {

enum EdgeType : std::uint8_t {
  kParallelism = 1,
  kConnectingGround = 2,
  kExmat = 4,
  kSpatialProximity = 8,
};

constexpr std::array<EdgeType, 4> kEdgeTypes{kParallelism, kConnectingGround, kExmat, kSpatialProximity};

const char* edge_type_name(EdgeType type);
EdgeType edge_type_from_name(std::string_view name);

enum class ProximityMode : std::uint8_t { knn, delaunay };

const char* proximity_mode_name(ProximityMode mode);
ProximityMode proximity_mode_from_name(std::string_view name);

/// Unordered segment pairs, stored as (lower, higher), sorted and unique.
using SegmentPairs = std::vector<std::array<std::int32_t, 2>>;

void normalize_pairs(SegmentPairs& pairs);

struct GraphNode {
  std::int32_t id = 0;
  SegmentType type = SegmentType::planar;
  Vec3 centroid = Vec3::Zero();  // area-weighted mean of face centroids
  Plane plane;
  double area = 0.0;
  bool groundless = false;  // no planar ground candidate within range

  bool operator==(const GraphNode& o) const {
    return id == o.id && type == o.type && centroid == o.centroid && plane.normal == o.plane.normal &&
           plane.offset == o.plane.offset && area == o.area && groundless == o.groundless;
  }
};

struct EdgeFeatures {
  std::vector<double> log_ratio;  // one entry per node feature channel
  double offset_mean = 0.0;
  double offset_std = 0.0;

  bool operator==(const EdgeFeatures&) const = default;
};

struct GraphEdge {
  std::int32_t a = 0;  // a < b
  std::int32_t b = 0;
  std::uint8_t types = 0;  // EdgeType bits
  EdgeFeatures features;

  bool operator==(const GraphEdge&) const = default;
};

struct SegmentGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> node_features;  // per node, aligned with feature_names
  std::vector<GraphEdge> edges;                    // sorted by (a, b)
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();

  std::size_t count(EdgeType type) const;
  const GraphEdge* find(std::int32_t a, std::int32_t b) const;
  bool operator==(const SegmentGraph&) const = default;
};

struct GraphParams {
  double parallel_angle_deg = 5.0;
  double ground_radius = 30.0;
  ProximityMode proximity = ProximityMode::knn;
  int knn_k = 16;
  double knn_cutoff_factor = 16.0;  // multiple of the median nearest-neighbor spacing
  double exmat_density = 10.0;      // samples per square meter
  double exmat_denoise_angle_deg = 30.0;
  double epsilon = 1e-6;            // log-ratio guard
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

/// Nodes with centroid, area, plane and type from the segmentation.
std::vector<GraphNode> graph_nodes(const TriangleMesh& mesh, const SegmentTopology& topology,
                                   const Segmentation& segmentation);

/// Planar pairs whose sign-folded normal angle is below the threshold.
SegmentPairs parallelism_edges(std::span<const GraphNode> nodes, double angle_deg);

/// Segment to local-ground pairs. Candidates are planar segments with a
/// vertex within `radius` (horizontal distance) of one of the segment's
/// boundary vertices; the ground is the candidate with the lowest centroid z,
/// then the larger area, then the lower id. A segment whose ground is itself
/// gets no edge. Segments without candidates are flagged groundless.
SegmentPairs connecting_ground_edges(const TriangleMesh& mesh, const SegmentTopology& topology,
                                     std::vector<GraphNode>& nodes, double radius);

/// Pairs joined by a valid exterior shrinking ball whose two touching samples
/// lie in different segments.
SegmentPairs exmat_edges(std::span<const SurfaceSample> samples, std::span<const std::int32_t> sample_segment,
                         double denoise_angle_deg, unsigned threads = 1);
SegmentPairs exmat_edges(const TriangleMesh& mesh, const Segmentation& segmentation, const GraphParams& params);

/// Points of the proximity graph: every vertex (tagged with the segments of
/// its incident faces) and every face centroid (tagged with its segment).
struct ProximityPoints {
  std::vector<Vec3> points;
  std::vector<std::vector<std::int32_t>> segments;
};

ProximityPoints proximity_points(const TriangleMesh& mesh, const Segmentation& segmentation);

/// Segment pairs linked by a point-graph edge, plus pairs that share a point.
SegmentPairs pairs_from_point_edges(const ProximityPoints& points,
                                    std::span<const std::array<std::int32_t, 2>> point_edges);

/// Symmetric kNN point graph with a distance cutoff.
std::vector<std::array<std::int32_t, 2>> knn_point_edges(std::span<const Vec3> points, int k, double cutoff,
                                                         unsigned threads = 1);

/// Spatial proximity pairs. In delaunay mode coplanar input falls back to
/// knn and a warning is written to *warning.
SegmentPairs proximity_edges(const TriangleMesh& mesh, const Segmentation& segmentation, const GraphParams& params,
                             std::string* warning = nullptr, ProximityMode* used_mode = nullptr);

/// Log-ratio node feature differences and boundary offsets for (a, b).
/// Channels with a negative minimum over all nodes are min-max scaled to
/// [0, 1] before the ratio; `shifted` marks them.
struct EdgeFeatureContext {
  std::vector<std::uint8_t> shifted;
  std::vector<double> lo, hi;
  double epsilon = 1e-6;

  static EdgeFeatureContext build(const std::vector<std::vector<double>>& node_features, double epsilon);
  std::vector<double> log_ratio(std::span<const double> a, std::span<const double> b) const;
};

/// Distances from each boundary vertex of `from` to the nearest boundary
/// vertex of `to` (all vertices when a segment has no boundary): mean and
/// population standard deviation.
std::pair<double, double> boundary_offsets(const TriangleMesh& mesh, std::span<const std::int32_t> from,
                                           std::span<const std::int32_t> to);

SegmentGraph build_segment_graph(const TriangleMesh& mesh, const AdjacencyIndex& adjacency,
                                 const Segmentation& segmentation, const FeatureTable& segment_features,
                                 const GraphParams& params = {});

/// JSON document {version, nodes, edges} (plus "meta" and "feature_block"
/// when present). Key and element order are deterministic.
nlohmann::ordered_json graph_to_json(const SegmentGraph& graph);
SegmentGraph graph_from_json(const nlohmann::ordered_json& doc);

/// Writes the JSON export. When `binary_block` is given, node feature rows
/// followed by edge log-ratio rows are also written there as little-endian
/// float32 and referenced from the JSON.
void export_graph(const SegmentGraph& graph, const std::filesystem::path& path,
                  const std::optional<std::filesystem::path>& binary_block = {});
SegmentGraph import_graph(const std::filesystem::path& path);

}  // namespace pss
