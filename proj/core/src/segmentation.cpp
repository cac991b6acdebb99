#include "pss/segmentation.hpp"

#include <algorithm>
#include <unordered_map>

namespace pss {

SegmentTopology build_segment_topology(const TriangleMesh& mesh, const AdjacencyIndex& adjacency,
                                       const Segmentation& seg) {
  const std::size_t ns = seg.size();
  SegmentTopology topo;
  topo.faces.resize(ns);
  topo.vertices.resize(ns);
  topo.boundary_edges.resize(ns);
  topo.boundary_vertices.resize(ns);
  topo.area.assign(ns, 0.0);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const auto s = seg.face_segment[f];
    topo.faces[s].push_back(static_cast<std::int32_t>(f));
    topo.area[s] += mesh.face_area[f];
    for (auto v : mesh.faces[f]) topo.vertices[s].push_back(v);
  }
  const auto& edges = adjacency.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& me = edges[e];
    const auto s0 = seg.face_segment[me.f0];
    const auto s1 = me.f1 >= 0 ? seg.face_segment[me.f1] : -1;
    if (s0 == s1) continue;
    topo.boundary_edges[s0].push_back(static_cast<std::int32_t>(e));
    topo.boundary_vertices[s0].push_back(me.v0);
    topo.boundary_vertices[s0].push_back(me.v1);
    if (s1 >= 0) {
      topo.boundary_edges[s1].push_back(static_cast<std::int32_t>(e));
      topo.boundary_vertices[s1].push_back(me.v0);
      topo.boundary_vertices[s1].push_back(me.v1);
    }
  }
  auto uniq = [](std::vector<std::int32_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  for (std::size_t s = 0; s < ns; ++s) {
    uniq(topo.vertices[s]);
    uniq(topo.boundary_vertices[s]);
  }
  return topo;
}

Segmentation segmentation_from_ids(const TriangleMesh& mesh, std::span<const std::int32_t> ids,
                                   std::span<const std::uint8_t> types) {
  if (ids.size() != mesh.num_faces()) throw InputError("segment id count does not match face count");
  Segmentation seg;
  seg.face_segment.resize(ids.size());
  std::unordered_map<std::int32_t, std::int32_t> dense;
  std::vector<std::int32_t> original;
  for (std::size_t f = 0; f < ids.size(); ++f) {
    auto [it, inserted] = dense.emplace(ids[f], static_cast<std::int32_t>(original.size()));
    if (inserted) original.push_back(ids[f]);
    seg.face_segment[f] = it->second;
  }
  // Ids that already form 0..n-1 are kept as they are.
  const bool already_dense = std::all_of(original.begin(), original.end(), [&](std::int32_t id) {
    return id >= 0 && static_cast<std::size_t>(id) < original.size();
  });
  if (already_dense) seg.face_segment.assign(ids.begin(), ids.end());
  const std::size_t ns = original.size();
  seg.segment_type.assign(ns, SegmentType::planar);
  if (!types.empty()) {
    for (std::size_t f = 0; f < ids.size(); ++f)
      seg.segment_type[seg.face_segment[f]] = types[f] ? SegmentType::nonplanar : SegmentType::planar;
  }
  std::vector<std::vector<Vec3>> pts(ns);
  std::vector<Vec3> orient(ns, Vec3::Zero());
  std::vector<std::int32_t> stamp(mesh.num_vertices(), -1);
  // Unique vertices per segment; faces are visited segment-major for stamping.
  std::vector<std::vector<std::int32_t>> faces_of(ns);
  for (std::size_t f = 0; f < ids.size(); ++f) faces_of[seg.face_segment[f]].push_back(static_cast<std::int32_t>(f));
  for (std::size_t s = 0; s < ns; ++s)
    for (auto f : faces_of[s]) {
      orient[s] += mesh.face_area[f] * mesh.face_normal[f];
      for (auto v : mesh.faces[f])
        if (stamp[v] != static_cast<std::int32_t>(s)) {
          stamp[v] = static_cast<std::int32_t>(s);
          pts[s].push_back(mesh.vertices[v]);
        }
    }
  seg.segment_plane.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    Plane fallback;
    if (orient[s].norm() > 0) fallback.normal = orient[s].normalized();
    if (!pts[s].empty()) fallback.offset = -fallback.normal.dot(pts[s].front());
    seg.segment_plane[s] = fit_plane_batch(pts[s], orient[s], fallback).plane;
  }
  return seg;
}

void check_segmentation(const AdjacencyIndex& adjacency, const Segmentation& seg) {
  const std::size_t nf = adjacency.num_faces();
  if (seg.face_segment.size() != nf) throw InputError("segmentation does not cover every face");
  std::vector<std::size_t> seen_faces(seg.size(), 0);
  for (auto s : seg.face_segment) {
    if (s < 0 || static_cast<std::size_t>(s) >= seg.size()) throw InputError("segment id out of range");
    ++seen_faces[s];
  }
  for (std::size_t s = 0; s < seg.size(); ++s)
    if (seen_faces[s] == 0) throw InputError("segment " + std::to_string(s) + " is empty");
  const auto comps = face_connected_components(adjacency, seg.face_segment);
  if (component_count(comps) != seg.size()) throw InputError("a segment is not edge-connected");
}

Segmentation segmentation_from_mesh(const TriangleMesh& mesh) {
  const auto it = mesh.face_properties.find("segment_id");
  if (it == mesh.face_properties.end()) throw InputError("mesh has no 'segment_id' face property");
  std::vector<std::int32_t> ids(it->second.values.begin(), it->second.values.end());
  std::vector<std::uint8_t> types;
  if (const auto t = mesh.face_properties.find("segment_type"); t != mesh.face_properties.end())
    types.assign(t->second.values.begin(), t->second.values.end());
  return segmentation_from_ids(mesh, ids, types);
}

void attach_segmentation(TriangleMesh& mesh, const Segmentation& seg) {
  FaceProperty id{ScalarType::int32, {}};
  FaceProperty type{ScalarType::uint8, {}};
  id.values.reserve(mesh.num_faces());
  type.values.reserve(mesh.num_faces());
  for (auto s : seg.face_segment) {
    id.values.push_back(s);
    type.values.push_back(static_cast<double>(seg.segment_type[s]));
  }
  mesh.face_properties["segment_id"] = std::move(id);
  mesh.face_properties["segment_type"] = std::move(type);
}

}  // namespace pss
