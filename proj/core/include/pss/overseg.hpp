#pragma once

#include <span>
#include <vector>

#include "pss/adjacency.hpp"
#include "pss/forest.hpp"
#include "pss/mesh.hpp"
#include "pss/plane_fit.hpp"
#include "pss/segmentation.hpp"

namespace pss {

/// Which non-planar score feeds the geometric term C = 1 - lambda_g * G.
enum class PriorDomain : std::uint8_t {
  probability,  // geometric-mean probability in [0, 1]
  log,          // mean log-probability (<= 0); makes C >= 1
};

struct GrowthParams {
  double lambda_d = 1.2;
  double lambda_m = 0.1;
  double lambda_g = 0.9;
  PriorDomain prior = PriorDomain::probability;

  /// Throws InputError unless all weights are finite and >= 0.
  void validate() const;
};

struct UnaryCost {
  double cost0 = 0.0;  // join the region
  double cost1 = 0.0;  // stay out
};

/// Unary costs from the distance d of the face's farthest vertex to the
/// region plane. C = 1 - lambda_g * prior when face and region are both
/// non-planar, +inf otherwise; cost0 = min(d, C), cost1 = 1 - min(d, C).
UnaryCost unary_cost(double distance, bool face_nonplanar, bool region_nonplanar, double prior,
                     const GrowthParams& params);

/// Largest vertex distance of face f to the plane.
double face_plane_distance(const TriangleMesh& mesh, std::size_t f, const Plane& plane);

/// Angle between the normals divided by pi, in [0, 1]. A zero normal gives 0
/// and sets *degenerate when provided.
double pairwise_cost(const Vec3& face_normal, const Vec3& region_normal, bool* degenerate = nullptr);

/// Energy terms of one frontier face against the current region.
struct FrontierTerm {
  UnaryCost unary;
  double pairwise = 0.0;  // paid when the face stays out (region label is 0)
};

/// U(X) = lambda_d * sum psi_i(x_i) + lambda_m * sum phi_i [x_i != 0].
double frontier_energy(std::span<const FrontierTerm> terms, std::span<const std::uint8_t> labels,
                       const GrowthParams& params);

/// Exact minimizer of frontier_energy: x_i = 0 iff
/// lambda_d * cost0 <= lambda_d * cost1 + lambda_m * phi (ties join).
std::vector<std::uint8_t> label_frontier(std::span<const FrontierTerm> terms, const GrowthParams& params);

/// Growing region. The plane is refit from the unique member vertices after
/// every added face.
struct RegionState {
  std::int32_t id = 0;
  std::vector<std::int32_t> faces;
  PlaneAccumulator accumulator;
  Plane plane;
  bool plane_degenerate = false;
  SegmentType type = SegmentType::planar;
  std::vector<std::int32_t> visited;  // faces rejected while growing this region
};

/// Region growing state shared by the regions of one mesh.
class RegionGrower {
 public:
  RegionGrower(const TriangleMesh& mesh, const AdjacencyIndex& adjacency, const ProbabilityMap& probmap,
               const GrowthParams& params);

  /// Frontier terms of `faces` against `region`.
  std::vector<FrontierTerm> frontier_terms(const RegionState& region, std::span<const std::int32_t> faces) const;

  /// Grows a region from an unassigned seed face and marks its faces
  /// assigned. Region type is the seed's predicted label.
  RegionState grow(std::int32_t seed, std::int32_t region_id);

  bool assigned(std::size_t f) const { return owner_[f] >= 0; }
  const std::vector<std::int32_t>& owner() const { return owner_; }

 private:
  void add_face(RegionState& region, std::int32_t f);

  const TriangleMesh& mesh_;
  const AdjacencyIndex& adjacency_;
  const ProbabilityMap& probmap_;
  GrowthParams params_;
  std::vector<std::int32_t> owner_;          // face -> region, -1 unassigned
  std::vector<std::int32_t> vertex_stamp_;   // vertex -> last region that accumulated it
  std::vector<std::int32_t> visited_stamp_;  // face -> last region that rejected it
};

/// Full over-segmentation: seeds are taken in order of decreasing planar
/// probability (ties to the lower face id) until every face is assigned.
Segmentation oversegment(const TriangleMesh& mesh, const AdjacencyIndex& adjacency, const ProbabilityMap& probmap,
                         const GrowthParams& params = {});

}  // namespace pss
