#include "pss/seggraph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "pss/delaunay.hpp"
#include "pss/kdtree.hpp"
#include "pss/medial_axis.hpp"
#include "pss/parallel.hpp"

namespace pss {

using json = nlohmann::ordered_json;

const char* edge_type_name(EdgeType type) {
  switch (type) {
    case kParallelism: return "parallelism";
    case kConnectingGround: return "connecting_ground";
    case kExmat: return "exmat";
    case kSpatialProximity: return "spatial_proximity";
  }
  return "unknown";
}

EdgeType edge_type_from_name(std::string_view name) {
  for (auto t : kEdgeTypes)
    if (name == edge_type_name(t)) return t;
  throw ParseError("unknown edge type '" + std::string(name) + "'");
}

const char* proximity_mode_name(ProximityMode mode) { return mode == ProximityMode::knn ? "knn" : "delaunay"; }

ProximityMode proximity_mode_from_name(std::string_view name) {
  if (name == "knn") return ProximityMode::knn;
  if (name == "delaunay") return ProximityMode::delaunay;
  throw InputError("unknown proximity mode '" + std::string(name) + "' (expected knn or delaunay)");
}

void normalize_pairs(SegmentPairs& pairs) {
  for (auto& p : pairs)
    if (p[0] > p[1]) std::swap(p[0], p[1]);
  std::erase_if(pairs, [](const auto& p) { return p[0] == p[1]; });
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
}

std::size_t SegmentGraph::count(EdgeType type) const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [&](const GraphEdge& e) { return e.types & type; }));
}

const GraphEdge* SegmentGraph::find(std::int32_t a, std::int32_t b) const {
  if (a > b) std::swap(a, b);
  const auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(a, b), [](const GraphEdge& e, const auto& key) {
    return std::make_pair(e.a, e.b) < key;
  });
  return it != edges.end() && it->a == a && it->b == b ? &*it : nullptr;
}

void GraphParams::validate() const {
  if (!(parallel_angle_deg >= 0.0 && parallel_angle_deg <= 90.0)) throw InputError("parallel angle must lie in [0, 90] degrees");
  if (!(ground_radius > 0.0)) throw InputError("ground radius must be > 0");
  if (knn_k <= 0) throw InputError("knn k must be > 0");
  if (!(knn_cutoff_factor > 0.0)) throw InputError("knn cutoff factor must be > 0");
  if (!(exmat_density > 0.0)) throw InputError("exmat sampling density must be > 0");
  if (!(epsilon > 0.0)) throw InputError("log-ratio epsilon must be > 0");
}

// ---------------------------------------------------------------- nodes

std::vector<GraphNode> graph_nodes(const TriangleMesh& mesh, const SegmentTopology& topology,
                                   const Segmentation& segmentation) {
  std::vector<GraphNode> nodes(segmentation.size());
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    GraphNode& n = nodes[s];
    n.id = static_cast<std::int32_t>(s);
    n.type = segmentation.segment_type[s];
    n.plane = segmentation.segment_plane[s];
    n.area = topology.area[s];
    Vec3 sum = Vec3::Zero();
    double w = 0.0;
    for (auto f : topology.faces[s]) {
      sum += mesh.face_area[f] * mesh.face_centroid[f];
      w += mesh.face_area[f];
    }
    if (w > 0) {
      n.centroid = sum / w;
    } else {
      for (auto f : topology.faces[s]) n.centroid += mesh.face_centroid[f];
      n.centroid /= static_cast<double>(std::max<std::size_t>(1, topology.faces[s].size()));
    }
  }
  return nodes;
}

// ---------------------------------------------------------------- edge families

SegmentPairs parallelism_edges(std::span<const GraphNode> nodes, double angle_deg) {
  const double limit = angle_deg * kPi / 180.0;
  std::vector<std::size_t> planar;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].type == SegmentType::planar) planar.push_back(i);
  SegmentPairs out;
  for (std::size_t x = 0; x < planar.size(); ++x)
    for (std::size_t y = x + 1; y < planar.size(); ++y) {
      const Vec3& a = nodes[planar[x]].plane.normal;
      const Vec3& b = nodes[planar[y]].plane.normal;
      const double angle = std::atan2(a.cross(b).norm(), std::abs(a.dot(b)));
      if (angle < limit) out.push_back({nodes[planar[x]].id, nodes[planar[y]].id});
    }
  normalize_pairs(out);
  return out;
}

SegmentPairs connecting_ground_edges(const TriangleMesh& mesh, const SegmentTopology& topology,
                                     std::vector<GraphNode>& nodes, double radius) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].type == SegmentType::planar) candidates.push_back(i);
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    const GraphNode &na = nodes[a], &nb = nodes[b];
    if (na.centroid.z() != nb.centroid.z()) return na.centroid.z() < nb.centroid.z();
    if (na.area != nb.area) return na.area > nb.area;
    return a < b;
  });
  std::vector<KdTree2> trees(nodes.size());
  for (auto c : candidates) {
    std::vector<Vec2> xy;
    for (auto v : topology.vertices[c]) xy.emplace_back(mesh.vertices[v].x(), mesh.vertices[v].y());
    trees[c] = KdTree2(std::move(xy));
  }
  const double r2 = radius * radius;
  SegmentPairs out;
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    const auto& probe = topology.boundary_vertices[s].empty() ? topology.vertices[s] : topology.boundary_vertices[s];
    nodes[s].groundless = true;
    for (auto c : candidates) {
      const bool in_range = std::any_of(probe.begin(), probe.end(), [&](std::int32_t v) {
        const Vec2 q(mesh.vertices[v].x(), mesh.vertices[v].y());
        return !trees[c].empty() && trees[c].nearest(q).dist2 <= r2;
      });
      if (!in_range) continue;
      nodes[s].groundless = false;
      if (c != s) out.push_back({static_cast<std::int32_t>(s), static_cast<std::int32_t>(c)});
      break;
    }
  }
  normalize_pairs(out);
  return out;
}

SegmentPairs exmat_edges(std::span<const SurfaceSample> samples, std::span<const std::int32_t> sample_segment,
                         double denoise_angle_deg, unsigned threads) {
  if (samples.size() != sample_segment.size()) throw InputError("sample segment list does not match the samples");
  if (samples.size() < 2) return {};
  std::vector<Vec3> pts(samples.size()), normals(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    pts[i] = samples[i].position;
    normals[i] = samples[i].normal;
  }
  ShrinkingBallParams bp;
  bp.side = BallSide::exterior;
  bp.denoise_angle_deg = denoise_angle_deg;
  bp.threads = threads;
  const KdTree3 tree(std::move(pts));
  const auto balls = shrinking_ball_transform(tree, normals, bp);
  SegmentPairs out;
  for (const auto& b : balls) {
    if (!b.valid()) continue;
    const auto sa = sample_segment[b.point], sb = sample_segment[b.touching];
    if (sa != sb) out.push_back({sa, sb});
  }
  normalize_pairs(out);
  return out;
}

SegmentPairs exmat_edges(const TriangleMesh& mesh, const Segmentation& segmentation, const GraphParams& params) {
  auto samples = sample_points(mesh, params.exmat_density, params.seed);
  // Samples whose normal could not be formed (isolated degenerate faces)
  // cannot carry a ball.
  std::erase_if(samples, [](const SurfaceSample& s) { return !(std::abs(s.normal.norm() - 1.0) < 1e-6); });
  std::vector<std::int32_t> seg(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) seg[i] = segmentation.face_segment[samples[i].face];
  return exmat_edges(samples, seg, params.exmat_denoise_angle_deg, params.threads);
}

ProximityPoints proximity_points(const TriangleMesh& mesh, const Segmentation& segmentation) {
  ProximityPoints pp;
  pp.points = mesh.vertices;
  pp.segments.resize(mesh.num_vertices());
  for (std::size_t f = 0; f < mesh.num_faces(); ++f)
    for (auto v : mesh.faces[f]) pp.segments[v].push_back(segmentation.face_segment[f]);
  for (auto& s : pp.segments) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    pp.points.push_back(mesh.face_centroid[f]);
    pp.segments.push_back({segmentation.face_segment[f]});
  }
  return pp;
}

SegmentPairs pairs_from_point_edges(const ProximityPoints& points,
                                    std::span<const std::array<std::int32_t, 2>> point_edges) {
  SegmentPairs out;
  for (const auto& s : points.segments)
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) out.push_back({s[i], s[j]});
  for (const auto& e : point_edges)
    for (auto a : points.segments[e[0]])
      for (auto b : points.segments[e[1]])
        if (a != b) out.push_back({a, b});
  normalize_pairs(out);
  return out;
}

std::vector<std::array<std::int32_t, 2>> knn_point_edges(std::span<const Vec3> points, int k, double cutoff,
                                                         unsigned threads) {
  const KdTree3 tree(std::vector<Vec3>(points.begin(), points.end()));
  std::vector<std::vector<std::array<std::int32_t, 2>>> per(points.size());
  const double c2 = cutoff * cutoff;
  parallel_for(points.size(), threads, [&](std::size_t i) {
    for (const auto& nb : tree.knn(points[i], static_cast<std::size_t>(k), static_cast<std::int32_t>(i)))
      if (nb.dist2 <= c2)
        per[i].push_back({std::min(static_cast<std::int32_t>(i), nb.index), std::max(static_cast<std::int32_t>(i), nb.index)});
  });
  std::vector<std::array<std::int32_t, 2>> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

double median_spacing(std::span<const Vec3> points, unsigned threads) {
  if (points.size() < 2) return 0.0;
  const KdTree3 tree(std::vector<Vec3>(points.begin(), points.end()));
  std::vector<double> d(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    d[i] = std::sqrt(tree.nearest(points[i], static_cast<std::int32_t>(i)).dist2);
  });
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

}  // namespace

SegmentPairs proximity_edges(const TriangleMesh& mesh, const Segmentation& segmentation, const GraphParams& params,
                             std::string* warning, ProximityMode* used_mode) {
  const ProximityPoints pp = proximity_points(mesh, segmentation);
  ProximityMode mode = params.proximity;
  if (mode == ProximityMode::delaunay && all_coplanar(pp.points)) {
    if (warning) *warning = "proximity: points are coplanar, Delaunay mode fell back to knn";
    mode = ProximityMode::knn;
  }
  if (used_mode) *used_mode = mode;
  if (mode == ProximityMode::delaunay) {
    DelaunayParams dp;
    dp.seed = params.seed;
    const auto tri = delaunay_3d(pp.points, dp);
    return pairs_from_point_edges(pp, tri.edges);
  }
  const double cutoff = params.knn_cutoff_factor * median_spacing(pp.points, params.threads);
  return pairs_from_point_edges(pp, knn_point_edges(pp.points, params.knn_k, cutoff, params.threads));
}

// ---------------------------------------------------------------- edge features

EdgeFeatureContext EdgeFeatureContext::build(const std::vector<std::vector<double>>& node_features, double epsilon) {
  EdgeFeatureContext ctx;
  ctx.epsilon = epsilon;
  if (node_features.empty()) return ctx;
  const std::size_t d = node_features.front().size();
  ctx.lo.assign(d, std::numeric_limits<double>::infinity());
  ctx.hi.assign(d, -std::numeric_limits<double>::infinity());
  for (const auto& row : node_features)
    for (std::size_t c = 0; c < d; ++c) {
      ctx.lo[c] = std::min(ctx.lo[c], row[c]);
      ctx.hi[c] = std::max(ctx.hi[c], row[c]);
    }
  ctx.shifted.resize(d);
  for (std::size_t c = 0; c < d; ++c) ctx.shifted[c] = ctx.lo[c] < 0.0;
  return ctx;
}

std::vector<double> EdgeFeatureContext::log_ratio(std::span<const double> a, std::span<const double> b) const {
  std::vector<double> out(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) {
    double x = a[c], y = b[c];
    if (c < shifted.size() && shifted[c]) {
      const double span = hi[c] - lo[c];
      x = span > 0 ? (x - lo[c]) / span : 0.0;
      y = span > 0 ? (y - lo[c]) / span : 0.0;
    }
    out[c] = std::log((x + epsilon) / (y + epsilon));
  }
  return out;
}

std::pair<double, double> boundary_offsets(const TriangleMesh& mesh, std::span<const std::int32_t> from,
                                           std::span<const std::int32_t> to) {
  if (from.empty() || to.empty()) return {0.0, 0.0};
  std::vector<Vec3> target;
  target.reserve(to.size());
  for (auto v : to) target.push_back(mesh.vertices[v]);
  const KdTree3 tree(std::move(target));
  double sum = 0.0, sum2 = 0.0;
  for (auto v : from) {
    const double d = std::sqrt(tree.nearest(mesh.vertices[v]).dist2);
    sum += d;
    sum2 += d * d;
  }
  const double n = static_cast<double>(from.size());
  const double mean = sum / n;
  return {mean, std::sqrt(std::max(0.0, sum2 / n - mean * mean))};
}

SegmentGraph build_segment_graph(const TriangleMesh& mesh, const AdjacencyIndex& adjacency,
                                 const Segmentation& segmentation, const FeatureTable& segment_features,
                                 const GraphParams& params) {
  params.validate();
  if (segment_features.rows() != segmentation.size())
    throw InputError("segment feature table does not match the segmentation");
  const SegmentTopology topo = build_segment_topology(mesh, adjacency, segmentation);

  SegmentGraph g;
  g.nodes = graph_nodes(mesh, topo, segmentation);
  g.feature_names = segment_features.names();
  g.node_features.resize(segmentation.size());
  for (std::size_t s = 0; s < segmentation.size(); ++s) {
    const auto row = segment_features.row(s);
    g.node_features[s].assign(row.begin(), row.end());
  }

  std::map<std::array<std::int32_t, 2>, std::uint8_t> merged;
  auto add = [&](const SegmentPairs& pairs, EdgeType t) {
    for (const auto& p : pairs) merged[p] |= t;
  };
  add(parallelism_edges(g.nodes, params.parallel_angle_deg), kParallelism);
  add(connecting_ground_edges(mesh, topo, g.nodes, params.ground_radius), kConnectingGround);
  add(exmat_edges(mesh, segmentation, params), kExmat);
  std::string warning;
  ProximityMode used = params.proximity;
  add(proximity_edges(mesh, segmentation, params, &warning, &used), kSpatialProximity);

  for (const auto& [p, t] : merged) g.edges.push_back(GraphEdge{p[0], p[1], t, {}});
  const auto ctx = EdgeFeatureContext::build(g.node_features, params.epsilon);
  parallel_for(g.edges.size(), params.threads, [&](std::size_t i) {
    GraphEdge& e = g.edges[i];
    e.features.log_ratio = ctx.log_ratio(g.node_features[e.a], g.node_features[e.b]);
    const auto& from = topo.boundary_vertices[e.a].empty() ? topo.vertices[e.a] : topo.boundary_vertices[e.a];
    const auto& to = topo.boundary_vertices[e.b].empty() ? topo.vertices[e.b] : topo.boundary_vertices[e.b];
    std::tie(e.features.offset_mean, e.features.offset_std) = boundary_offsets(mesh, from, to);
  });

  g.meta["proximity_mode"] = proximity_mode_name(used);
  g.meta["parallel_angle_deg"] = params.parallel_angle_deg;
  g.meta["ground_radius_m"] = params.ground_radius;
  g.meta["log_ratio_epsilon"] = params.epsilon;
  json shifted = json::array();
  for (std::size_t c = 0; c < ctx.shifted.size(); ++c)
    if (ctx.shifted[c]) shifted.push_back(g.feature_names[c]);
  g.meta["minmax_shifted_channels"] = shifted;
  if (!warning.empty()) g.meta["warnings"] = json::array({warning});
  return g;
}

// ---------------------------------------------------------------- export

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

double num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("graph JSON: expected a 3-vector");
  return {num(j[0]), num(j[1]), num(j[2])};
}

}  // namespace

json graph_to_json(const SegmentGraph& graph) {
  json doc = json::object();
  doc["version"] = 1;
  if (!graph.meta.empty()) doc["meta"] = graph.meta;
  json nodes = json::array();
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const GraphNode& n = graph.nodes[i];
    json jn = json::object();
    jn["id"] = n.id;
    jn["type"] = n.type == SegmentType::planar ? "planar" : "nonplanar";
    jn["area"] = n.area;
    jn["centroid"] = vec_json(n.centroid);
    jn["plane"] = json{{"normal", vec_json(n.plane.normal)}, {"offset", n.plane.offset}};
    jn["groundless"] = n.groundless;
    json f = json::object();
    if (i < graph.node_features.size())
      for (std::size_t c = 0; c < graph.feature_names.size(); ++c) f[graph.feature_names[c]] = graph.node_features[i][c];
    jn["features"] = std::move(f);
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& e : graph.edges) {
    json je = json::object();
    je["a"] = e.a;
    je["b"] = e.b;
    json types = json::array();
    for (auto t : kEdgeTypes)
      if (e.types & t) types.push_back(edge_type_name(t));
    je["types"] = std::move(types);
    json f = json::object();
    for (std::size_t c = 0; c < e.features.log_ratio.size() && c < graph.feature_names.size(); ++c)
      f["log_" + graph.feature_names[c]] = e.features.log_ratio[c];
    f["offset_mean"] = e.features.offset_mean;
    f["offset_std"] = e.features.offset_std;
    je["features"] = std::move(f);
    edges.push_back(std::move(je));
  }
  doc["edges"] = std::move(edges);
  return doc;
}

SegmentGraph graph_from_json(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("version", 0) != 1) throw ParseError("graph JSON: unsupported or missing version");
    SegmentGraph g;
    if (doc.contains("meta")) g.meta = doc["meta"];
    for (const auto& jn : doc.at("nodes")) {
      GraphNode n;
      n.id = jn.at("id").get<std::int32_t>();
      const auto type = jn.at("type").get<std::string>();
      if (type != "planar" && type != "nonplanar") throw ParseError("graph JSON: unknown node type '" + type + "'");
      n.type = type == "planar" ? SegmentType::planar : SegmentType::nonplanar;
      n.area = num(jn.value("area", json(0.0)));
      if (jn.contains("centroid")) n.centroid = vec_from(jn["centroid"]);
      if (jn.contains("plane")) {
        n.plane.normal = vec_from(jn["plane"].at("normal"));
        n.plane.offset = num(jn["plane"].at("offset"));
      }
      n.groundless = jn.value("groundless", false);
      std::vector<double> values;
      std::vector<std::string> names;
      for (const auto& [k, v] : jn.at("features").items()) {
        names.push_back(k);
        values.push_back(num(v));
      }
      if (g.nodes.empty()) g.feature_names = names;
      else if (names != g.feature_names) throw ParseError("graph JSON: nodes disagree on feature names");
      if (n.id != static_cast<std::int32_t>(g.nodes.size())) throw ParseError("graph JSON: node ids must be 0..n-1 in order");
      g.nodes.push_back(n);
      g.node_features.push_back(std::move(values));
    }
    for (const auto& je : doc.at("edges")) {
      GraphEdge e;
      e.a = je.at("a").get<std::int32_t>();
      e.b = je.at("b").get<std::int32_t>();
      if (e.a >= e.b || e.a < 0 || static_cast<std::size_t>(e.b) >= g.nodes.size())
        throw ParseError("graph JSON: invalid edge endpoints");
      for (const auto& t : je.at("types")) e.types |= edge_type_from_name(t.get<std::string>());
      const auto& f = je.at("features");
      for (const auto& name : g.feature_names) e.features.log_ratio.push_back(num(f.at("log_" + name)));
      e.features.offset_mean = num(f.at("offset_mean"));
      e.features.offset_std = num(f.at("offset_std"));
      g.edges.push_back(std::move(e));
    }
    return g;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("graph JSON: ") + ex.what());
  }
}

void export_graph(const SegmentGraph& graph, const std::filesystem::path& path,
                  const std::optional<std::filesystem::path>& binary_block) {
  json doc = graph_to_json(graph);
  if (binary_block) {
    std::string bytes;
    auto put = [&](double v) {
      const float f = static_cast<float>(v);
      char buf[4];
      std::memcpy(buf, &f, 4);
      if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + 4);
      bytes.append(buf, 4);
    };
    for (const auto& row : graph.node_features)
      for (double v : row) put(v);
    for (const auto& e : graph.edges) {
      for (double v : e.features.log_ratio) put(v);
      put(e.features.offset_mean);
      put(e.features.offset_std);
    }
    std::ofstream out(*binary_block, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write feature block '" + binary_block->string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing feature block '" + binary_block->string() + "'");
    json fb = json::object();
    fb["path"] = binary_block->filename().string();
    fb["dtype"] = "float32le";
    fb["node_rows"] = graph.node_features.size();
    fb["node_cols"] = graph.feature_names.size();
    fb["edge_rows"] = graph.edges.size();
    fb["edge_cols"] = graph.feature_names.size() + 2;
    doc["feature_block"] = std::move(fb);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write graph file '" + path.string() + "'");
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("failed writing graph file '" + path.string() + "'");
}

SegmentGraph import_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& ex) {
    throw ParseError("graph file '" + path.string() + "': " + ex.what());
  }
  return graph_from_json(doc);
}

}  // namespace pss
