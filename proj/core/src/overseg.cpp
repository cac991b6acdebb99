#include "pss/overseg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pss {

void GrowthParams::validate() const {
  for (double v : {lambda_d, lambda_m, lambda_g})
    if (!std::isfinite(v) || v < 0.0) throw InputError("growth weights must be finite and >= 0");
}

UnaryCost unary_cost(double distance, bool face_nonplanar, bool region_nonplanar, double prior,
                     const GrowthParams& params) {
  const double c = (face_nonplanar && region_nonplanar) ? 1.0 - params.lambda_g * prior
                                                         : std::numeric_limits<double>::infinity();
  const double m = std::min(distance, c);
  return {m, 1.0 - m};
}

double face_plane_distance(const TriangleMesh& mesh, std::size_t f, const Plane& plane) {
  double d = 0.0;
  for (auto v : mesh.faces[f]) d = std::max(d, plane.distance(mesh.vertices[v]));
  return d;
}

double pairwise_cost(const Vec3& face_normal, const Vec3& region_normal, bool* degenerate) {
  const double na = face_normal.norm(), nb = region_normal.norm();
  if (na == 0.0 || nb == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  if (degenerate) *degenerate = false;
  // atan2 of |a x b| and a.b stays accurate for nearly parallel normals.
  return std::atan2(face_normal.cross(region_normal).norm(), face_normal.dot(region_normal)) / kPi;
}

double frontier_energy(std::span<const FrontierTerm> terms, std::span<const std::uint8_t> labels,
                       const GrowthParams& params) {
  double unary = 0.0, pairwise = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (labels[i]) {
      unary += terms[i].unary.cost1;
      pairwise += terms[i].pairwise;
    } else {
      unary += terms[i].unary.cost0;
    }
  }
  return params.lambda_d * unary + params.lambda_m * pairwise;
}

std::vector<std::uint8_t> label_frontier(std::span<const FrontierTerm> terms, const GrowthParams& params) {
  std::vector<std::uint8_t> labels(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    labels[i] = params.lambda_d * t.unary.cost0 <= params.lambda_d * t.unary.cost1 + params.lambda_m * t.pairwise ? 0 : 1;
  }
  return labels;
}

RegionGrower::RegionGrower(const TriangleMesh& mesh, const AdjacencyIndex& adjacency, const ProbabilityMap& probmap,
                           const GrowthParams& params)
    : mesh_(mesh),
      adjacency_(adjacency),
      probmap_(probmap),
      params_(params),
      owner_(mesh.num_faces(), -1),
      vertex_stamp_(mesh.num_vertices(), -1),
      visited_stamp_(mesh.num_faces(), -1) {
  params_.validate();
  if (probmap.size() != mesh.num_faces()) throw InputError("probability map does not cover every face");
  if (adjacency.num_faces() != mesh.num_faces()) throw InputError("adjacency does not match the mesh");
}

std::vector<FrontierTerm> RegionGrower::frontier_terms(const RegionState& region,
                                                       std::span<const std::int32_t> faces) const {
  if (region.faces.empty()) throw InputError("region has no faces");
  const bool region_nonplanar = region.type == SegmentType::nonplanar;
  std::vector<FrontierTerm> terms(faces.size());
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const auto f = static_cast<std::size_t>(faces[k]);
    const double prior = params_.prior == PriorDomain::probability ? probmap_.nonplanar[f] : probmap_.log_nonplanar[f];
    terms[k].unary = unary_cost(face_plane_distance(mesh_, f, region.plane), probmap_.label[f] == 1,
                                region_nonplanar, prior, params_);
    terms[k].pairwise = pairwise_cost(mesh_.face_normal[f], region.plane.normal);
  }
  return terms;
}

void RegionGrower::add_face(RegionState& region, std::int32_t f) {
  owner_[f] = region.id;
  region.faces.push_back(f);
  for (auto v : mesh_.faces[f]) {
    if (vertex_stamp_[v] == region.id) continue;
    vertex_stamp_[v] = region.id;
    region.accumulator.add(mesh_.vertices[v]);
  }
  region.accumulator.add_orientation(mesh_.face_normal[f] * mesh_.face_area[f]);
  const auto fit = region.accumulator.fit(region.plane);
  region.plane = fit.plane;
  region.plane_degenerate = fit.degenerate;
}

RegionState RegionGrower::grow(std::int32_t seed, std::int32_t region_id) {
  if (owner_[seed] >= 0) throw InputError("seed face is already assigned");
  RegionState region;
  region.id = region_id;
  region.type = probmap_.label[seed] == 1 ? SegmentType::nonplanar : SegmentType::planar;
  // Until three independent vertices exist the seed face's own plane stands in.
  const Vec3& n = mesh_.face_normal[seed];
  region.plane.normal = n.squaredNorm() > 0 ? n : Vec3::UnitZ();
  region.plane.offset = -region.plane.normal.dot(mesh_.face_centroid[seed]);
  add_face(region, seed);

  std::vector<std::int32_t> front{seed}, frontier, added;
  while (!front.empty()) {
    frontier.clear();
    for (auto f : front)
      for (auto g : adjacency_.face_neighbors(f))
        if (g >= 0 && owner_[g] < 0 && visited_stamp_[g] != region_id) frontier.push_back(g);
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    if (frontier.empty()) break;

    const auto labels = label_frontier(frontier_terms(region, frontier), params_);
    added.clear();
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      if (labels[k] == 0) {
        add_face(region, frontier[k]);
        added.push_back(frontier[k]);
      } else {
        visited_stamp_[frontier[k]] = region_id;
        region.visited.push_back(frontier[k]);
      }
    }
    front.swap(added);
  }
  return region;
}

Segmentation oversegment(const TriangleMesh& mesh, const AdjacencyIndex& adjacency, const ProbabilityMap& probmap,
                         const GrowthParams& params) {
  RegionGrower grower(mesh, adjacency, probmap, params);
  const std::size_t n = mesh.num_faces();
  std::vector<std::int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int32_t a, std::int32_t b) { return probmap.planar[a] > probmap.planar[b]; });

  Segmentation seg;
  for (auto f : order) {
    if (grower.assigned(f)) continue;
    const RegionState region = grower.grow(f, static_cast<std::int32_t>(seg.size()));
    seg.segment_type.push_back(region.type);
    seg.segment_plane.push_back(region.plane);
  }
  seg.face_segment = grower.owner();
  return seg;
}

}  // namespace pss
