#include "pss/segment_features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "pss/face_features.hpp"
#include "pss/plane_fit.hpp"

namespace pss {

std::vector<std::vector<std::int32_t>> boundary_chains(const AdjacencyIndex& adjacency,
                                                       std::span<const std::int32_t> edges) {
  const auto& all = adjacency.edges();
  std::unordered_map<std::int32_t, std::vector<std::int32_t>> incident;  // vertex -> local edge ids
  for (std::size_t i = 0; i < edges.size(); ++i) {
    incident[all[edges[i]].v0].push_back(static_cast<std::int32_t>(i));
    incident[all[edges[i]].v1].push_back(static_cast<std::int32_t>(i));
  }
  std::vector<std::uint8_t> used(edges.size(), 0);
  std::vector<std::vector<std::int32_t>> chains;
  auto walk = [&](std::int32_t start_edge, std::int32_t start_vertex) {
    std::vector<std::int32_t> chain{start_vertex};
    std::int32_t e = start_edge, v = start_vertex;
    while (e >= 0 && !used[e]) {
      used[e] = 1;
      const auto& me = all[edges[e]];
      v = me.v0 == v ? me.v1 : me.v0;
      chain.push_back(v);
      const auto& inc = incident[v];
      e = -1;
      if (inc.size() == 2)
        for (auto x : inc)
          if (!used[x]) e = x;
    }
    return chain;
  };
  // Open chains start at branch or end vertices (degree != 2).
  std::vector<std::int32_t> verts;
  for (const auto& [v, inc] : incident) verts.push_back(v);
  std::sort(verts.begin(), verts.end());
  for (auto v : verts) {
    const auto& inc = incident[v];
    if (inc.size() == 2) continue;
    for (auto e : inc)
      if (!used[e]) chains.push_back(walk(e, v));
  }
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (!used[e]) chains.push_back(walk(static_cast<std::int32_t>(e), all[edges[e]].v0));
  return chains;
}

ShapeFeatures segment_shape(const TriangleMesh& mesh, const AdjacencyIndex& adjacency,
                            const SegmentTopology& topo, std::size_t s, const Plane& plane) {
  ShapeFeatures out;
  out.area = topo.area[s];
  for (auto e : topo.boundary_edges[s]) out.circumference += adjacency.edges()[e].length;
  if (!(out.area > 0.0)) throw InputError("segment " + std::to_string(s) + " has zero area");

  const double C = out.circumference;
  out.compactness = C > 0.0 ? std::min(1.0, 4.0 * kPi * out.area / (C * C)) : 1.0;
  out.shape_index = C / std::pow(out.area, 0.25);

  double zlo = std::numeric_limits<double>::infinity(), zhi = -zlo, dist = 0.0;
  for (auto v : topo.vertices[s]) {
    const Vec3& p = mesh.vertices[v];
    zlo = std::min(zlo, p.z());
    zhi = std::max(zhi, p.z());
    dist += plane.distance(p);
  }
  out.vertical_extent = topo.vertices[s].empty() ? 0.0 : zhi - zlo;
  out.avg_plane_distance = topo.vertices[s].empty() ? 0.0 : dist / static_cast<double>(topo.vertices[s].size());

  const auto chains = boundary_chains(adjacency, topo.boundary_edges[s]);
  double sd = 0.0;
  std::size_t used = 0;
  for (const auto& chain : chains) {
    // Closed loops repeat the start vertex at the end.
    std::size_t m = chain.size();
    if (m > 1 && chain.front() == chain.back()) --m;
    if (m < 2) continue;
    Vec3 c = Vec3::Zero();
    for (std::size_t i = 0; i < m; ++i) c += mesh.vertices[chain[i]];
    c /= static_cast<double>(m);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < m; ++i) {
      const Vec3 d = mesh.vertices[chain[i]] - c;
      cov += d * d.transpose();
    }
    const Spectrum3 sp = sorted_spectrum(cov / static_cast<double>(m));
    sd += sp.values[0] > 0.0 ? sp.values[1] / sp.values[0] : 0.0;
    ++used;
  }
  out.straightness = used ? sd / static_cast<double>(used) : 0.0;
  return out;
}

std::vector<std::string> segment_feature_names(const std::vector<std::string>& face_names) {
  std::vector<std::string> names;
  for (const auto& n : face_names) names.push_back(n + "_mean");
  for (const auto& n : face_names) names.push_back(n + "_std");
  for (const char* n : {"compactness", "shape_index", "straightness", "avg_plane_distance"}) names.emplace_back(n);
  for (int h = 0; h < kHsvBins; ++h)
    for (int s = 0; s < kHsvBins; ++s)
      for (int v = 0; v < kHsvBins; ++v)
        names.push_back("hsv_" + std::to_string(h) + std::to_string(s) + std::to_string(v));
  for (const char* n : {"area", "circumference", "vertical_extent"}) names.emplace_back(n);
  return names;
}

FeatureTable compute_segment_features(const TriangleMesh& mesh, const AdjacencyIndex& adjacency,
                                      const Segmentation& seg, const FeatureTable& face_features) {
  if (face_features.rows() != mesh.num_faces()) throw InputError("face feature rows do not match face count");
  const std::size_t ns = seg.size();
  const std::size_t d = face_features.cols();
  const SegmentTopology topo = build_segment_topology(mesh, adjacency, seg);
  FeatureTable table(segment_feature_names(face_features.names()), ns);
  const bool colored = mesh.has_colors();

  for (std::size_t s = 0; s < ns; ++s) {
    auto row = table.row(s);
    const ShapeFeatures shape = segment_shape(mesh, adjacency, topo, s, seg.segment_plane[s]);
    const double wsum = shape.area;

    // Two-pass weighted mean and population standard deviation.
    for (std::size_t c = 0; c < d; ++c) {
      double mean = 0.0;
      for (auto f : topo.faces[s]) mean += mesh.face_area[f] * face_features.at(f, c);
      mean /= wsum;
      double var = 0.0;
      for (auto f : topo.faces[s]) {
        const double x = face_features.at(f, c) - mean;
        var += mesh.face_area[f] * x * x;
      }
      row[c] = mean;
      row[d + c] = std::sqrt(std::max(0.0, var / wsum));
    }
    std::size_t col = 2 * d;
    row[col++] = shape.compactness;
    row[col++] = shape.shape_index;
    row[col++] = shape.straightness;
    row[col++] = shape.avg_plane_distance;

    const std::size_t hist0 = col;
    if (colored) {
      for (auto f : topo.faces[s]) {
        const Vec3 hsv = rgb_to_hsv(mesh.color_of(f));
        const int hb = std::min(kHsvBins - 1, static_cast<int>(hsv[0] / 360.0 * kHsvBins));
        const int sb = std::min(kHsvBins - 1, static_cast<int>(hsv[1] * kHsvBins));
        const int vb = std::min(kHsvBins - 1, static_cast<int>(hsv[2] * kHsvBins));
        row[hist0 + (hb * kHsvBins + sb) * kHsvBins + vb] += mesh.face_area[f] / wsum;
      }
    }
    col += kHsvBins * kHsvBins * kHsvBins;
    row[col++] = shape.area;
    row[col++] = shape.circumference;
    row[col++] = shape.vertical_extent;
  }
  return table;
}

}  // namespace pss
