#include <doctest.h>

#include <filesystem>
#include <queue>

#include "fixtures.hpp"
#include "pss/kdtree.hpp"
#include "pss/mesh_io.hpp"
#include "pss/repair.hpp"
#include "pss/sampling.hpp"
#include "pss/synth.hpp"

using namespace pss;
using pss::testing::grid_mesh;
using pss::testing::make_mesh;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "pss_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::set<int> bfs_ring(const TriangleMesh& m, int v, int k) {
  std::vector<std::set<int>> nb(m.num_vertices());
  for (const auto& f : m.faces)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (f[a] != f[b]) nb[f[a]].insert(f[b]);
  std::vector<int> dist(m.num_vertices(), -1);
  std::queue<int> q;
  dist[v] = 0;
  q.push(v);
  std::set<int> out;
  while (!q.empty()) {
    int x = q.front();
    q.pop();
    out.insert(x);
    if (dist[x] == k) continue;
    for (int y : nb[x])
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
  }
  return out;
}

}  // namespace

TEST_CASE("ascii PLY with one labeled triangle") {
  const std::string ply =
      "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
      "element face 1\nproperty list uchar int vertex_indices\nproperty int label\nend_header\n"
      "0 0 0\n1 0 0\n0 1 0\n3 0 1 2 3\n";
  const auto m = parse_ply(ply);
  CHECK(m.num_faces() == 1);
  REQUIRE(m.face_label.size() == 1);
  CHECK(m.face_label[0] == 3);
  CHECK(m.face_area[0] == doctest::Approx(0.5));
}

TEST_CASE("out-of-range face index is a parse error") {
  const std::string ply =
      "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n";
  try {
    parse_ply(ply);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("index out of range") != std::string::npos);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("truncated binary PLY names a byte offset") {
  auto m = grid_mesh(1, 1);
  std::string bytes = serialize_ply(m, PlyEncoding::binary_little_endian);
  bytes.resize(bytes.size() - 5);
  try {
    parse_ply(bytes);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
}

TEST_CASE("binary PLY of two faces sharing an edge") {
  auto m = grid_mesh(1, 1);
  const auto path = temp_file("two_faces.ply");
  save_mesh(m, path, PlyEncoding::binary_little_endian);
  const auto back = load_mesh(path);
  const auto adj = AdjacencyIndex::build(back);
  CHECK(pss::testing::index_face_adjacency(adj) == pss::testing::brute_face_adjacency(back));
  const auto& n0 = adj.face_neighbors(0);
  CHECK(std::count(n0.begin(), n0.end(), 1) == 1);
  const auto& n1 = adj.face_neighbors(1);
  CHECK(std::count(n1.begin(), n1.end(), 0) == 1);
}

TEST_CASE("save/load round trip") {
  SynthParams p;
  p.ground_size = 24;
  p.boxes = 1;
  p.trees = 1;
  p.vehicles = 1;
  auto m = synth_tile(p).mesh;
  m.face_properties["segment_id"] = FaceProperty{ScalarType::int32, std::vector<double>(m.num_faces(), 4.0)};
  for (auto enc : {PlyEncoding::binary_little_endian, PlyEncoding::ascii}) {
    const auto path = temp_file(enc == PlyEncoding::ascii ? "rt_ascii.ply" : "rt_bin.ply");
    save_mesh(m, path, enc);
    const auto back = load_mesh(path);
    CHECK(back.same_content(m));
    CHECK(back.vertices == m.vertices);
    CHECK(back.face_label == m.face_label);
  }
  SUBCASE("no labels means no label property") {
    TriangleMesh plain = grid_mesh(2, 2);
    const auto text = serialize_ply(plain, PlyEncoding::ascii);
    CHECK(text.find("label") == std::string::npos);
    CHECK(text.find("red") == std::string::npos);
  }
}

TEST_CASE("large mesh round trip keeps labels") {
  auto m = grid_mesh(71, 71);
  REQUIRE(m.num_faces() > 10000);
  m.face_label.resize(m.num_faces());
  for (std::size_t f = 0; f < m.num_faces(); ++f) m.face_label[f] = static_cast<int>(f % 7) - 1;
  const auto path = temp_file("big.ply");
  save_mesh(m, path);
  CHECK(load_mesh(path).face_label == m.face_label);
}

TEST_CASE("OBJ reader") {
  const auto m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  CHECK(m.num_faces() == 2);
  CHECK(m.total_area() == doctest::Approx(1.0));
  CHECK_THROWS_AS(parse_obj("v 0 0 0\nf 1 2 3\n"), ParseError);
}

TEST_CASE("missing file is an I/O error naming the path") {
  try {
    load_mesh("/nonexistent/dir/mesh.ply");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/mesh.ply") != std::string::npos);
  }
}

TEST_CASE("weld_vertices") {
  SUBCASE("coincident pair") {
    auto m = make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}}, {{0, 1, 2}, {3, 4, 2}});
    const auto r = weld_vertices(m, 1e-6);
    CHECK(r.mesh.num_vertices() == 4);
    CHECK(r.report.welded_vertices == 1);
  }
  SUBCASE("epsilon zero, distinct vertices: identity") {
    auto m = grid_mesh(3, 2);
    const auto r = weld_vertices(m, 0.0);
    CHECK(r.mesh.same_content(m));
    CHECK(r.report.welded_vertices == 0);
  }
  SUBCASE("duplicated seam becomes adjacent") {
    auto a = grid_mesh(1, 1);
    auto b = grid_mesh(1, 1);
    for (auto& v : b.vertices) v.x() += 1.0;
    auto m = pss::testing::merge(a, b);
    CHECK(pss::testing::index_face_adjacency(AdjacencyIndex::build(m)).size() == 2);
    const auto r = weld_vertices(m, 1e-6);
    CHECK(r.report.welded_vertices == 2);
    const auto adj = AdjacencyIndex::build(r.mesh);
    CHECK(pss::testing::index_face_adjacency(adj) == pss::testing::brute_face_adjacency(r.mesh));
    CHECK(pss::testing::index_face_adjacency(adj).size() == 3);
    double area = 0;
    for (std::size_t f = 0; f < r.mesh.num_faces(); ++f)
      if (!r.mesh.face_degenerate[f]) area += r.mesh.face_area[f];
    CHECK(area == doctest::Approx(m.total_area()).epsilon(1e-9));
  }
  SUBCASE("collapsed face is kept and flagged") {
    auto m = make_mesh({{0, 0, 0}, {1, 0, 0}, {1e-9, 0, 0}, {0, 1, 0}}, {{0, 1, 3}, {0, 2, 3}});
    const auto r = weld_vertices(m, 1e-6);
    CHECK(r.mesh.num_faces() == 2);
    CHECK(r.mesh.face_degenerate[1] == 1);
    CHECK(r.report.degenerate_faces == 1);
  }
  CHECK_THROWS_AS(weld_vertices(grid_mesh(1, 1), -1.0), InputError);
}

TEST_CASE("repair_nonmanifold") {
  SUBCASE("three triangles on one edge") {
    auto m = make_mesh({{0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {0.5, -1, 0}, {0.5, 0, 1}}, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}});
    CHECK(count_nonmanifold_edges(m) == 1);
    CHECK_THROWS_AS(AdjacencyIndex::build(m), TopologyError);
    const auto r = repair_nonmanifold(m);
    CHECK(r.report.nonmanifold_edges_before == 1);
    CHECK(r.report.nonmanifold_edges_after == 0);
    CHECK(count_nonmanifold_edges(r.mesh) == 0);
    CHECK(r.mesh.num_faces() == 3);
    CHECK_NOTHROW(AdjacencyIndex::build(r.mesh));
  }
  SUBCASE("manifold mesh is unchanged") {
    auto m = grid_mesh(3, 3);
    const auto r = repair_nonmanifold(m);
    CHECK(r.mesh.same_content(m));
    CHECK(r.report.split_vertices == 0);
    CHECK(r.report.nonmanifold_edges_before == 0);
    CHECK(r.report.nonmanifold_edges_after == 0);
  }
  SUBCASE("bow-tie vertex is split") {
    auto m = make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}}, {{0, 1, 2}, {0, 3, 4}});
    const auto r = repair_nonmanifold(m);
    CHECK(r.report.split_vertices == 1);
    CHECK(r.mesh.num_vertices() == 6);
    CHECK(r.mesh.num_faces() == 2);
    CHECK(r.mesh.faces[0][0] != r.mesh.faces[1][0]);
  }
}

TEST_CASE("adjacency") {
  SUBCASE("single face has no neighbors") {
    auto m = make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    const auto adj = AdjacencyIndex::build(m);
    for (auto g : adj.face_neighbors(0)) CHECK(g == -1);
    CHECK(adj.edges().size() == 3);
  }
  SUBCASE("2x2 quad grid: an interior face has 3 neighbors") {
    auto m = grid_mesh(2, 2);
    const auto adj = AdjacencyIndex::build(m);
    CHECK(pss::testing::index_face_adjacency(adj) == pss::testing::brute_face_adjacency(m));
    int max_deg = 0;
    for (std::size_t f = 0; f < m.num_faces(); ++f) {
      int d = 0;
      for (auto g : adj.face_neighbors(f)) d += g >= 0;
      max_deg = std::max(max_deg, d);
    }
    CHECK(max_deg == 3);
  }
  SUBCASE("matches brute force on random manifold patches") {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
      auto m = grid_mesh(2 + static_cast<int>(uniform_index(rng, 8)), 2 + static_cast<int>(uniform_index(rng, 8)));
      const auto adj = AdjacencyIndex::build(m);
      CHECK(pss::testing::index_face_adjacency(adj) == pss::testing::brute_face_adjacency(m));
      for (const auto& e : adj.edges()) CHECK(e.length > 0);
    }
  }
}

TEST_CASE("face_connected_components") {
  auto m = grid_mesh(6, 1);  // 12 faces in a strip
  const auto adj = AdjacencyIndex::build(m);
  std::vector<std::int32_t> one(12, 0);
  CHECK(component_count(face_connected_components(adj, one)) == 1);

  std::vector<std::int32_t> islands(12, 0);
  for (int f = 4; f < 8; ++f) islands[f] = 1;
  const auto c = face_connected_components(adj, islands);
  CHECK(component_count(c) == 3);
  CHECK(c[0] == c[3]);
  CHECK(c[0] != c[11]);

  // Checkerboard by quad: every quad is its own component.
  std::vector<std::int32_t> checker(12);
  for (int f = 0; f < 12; ++f) checker[f] = (f / 2) % 2;
  CHECK(component_count(face_connected_components(adj, checker)) == 6);

  std::vector<std::int32_t> with_unlabeled = islands;
  with_unlabeled[5] = -1;
  CHECK(face_connected_components(adj, with_unlabeled)[5] == -1);

  SUBCASE("idempotent") {
    const auto c2 = face_connected_components(adj, c);
    CHECK(c2 == c);
  }
}

TEST_CASE("k_ring_vertices") {
  auto path = make_mesh({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {0.5, 1, 0}, {1.5, 1, 0}, {2.5, 1, 0}},
                        {{0, 1, 4}, {1, 2, 5}, {2, 3, 6}});
  const auto adj = AdjacencyIndex::build(path);
  CHECK(k_ring_vertices(adj, 0, 0) == std::vector<std::int32_t>{0});

  const auto ico = icosphere(0, Vec3::Zero(), 1.0);
  CHECK(k_ring_vertices(AdjacencyIndex::build(ico), 0, 1).size() == 6);

  auto m = grid_mesh(6, 5);
  const auto gadj = AdjacencyIndex::build(m);
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    for (int k = 0; k <= 3; ++k) {
      const auto ring = k_ring_vertices(gadj, static_cast<int>(v), k);
      const auto oracle = bfs_ring(m, static_cast<int>(v), k);
      CHECK(std::set<int>(ring.begin(), ring.end()) == oracle);
    }
}

TEST_CASE("sample_points") {
  auto m = grid_mesh(5, 2);  // 10 m^2
  CHECK(sample_points(m, 10.0, 1).size() == 100);
  auto tiny = make_mesh({{0, 0, 0}, {0.5, 0, 0}, {0, 0.4, 0}}, {{0, 1, 2}});  // 0.1 m^2
  CHECK(sample_points(tiny, 10.0, 1).size() == 1);
  const auto a = sample_points(m, 7.3, 42), b = sample_points(m, 7.3, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].position == b[i].position);
    CHECK(a[i].face == b[i].face);
    CHECK(a[i].normal.norm() == doctest::Approx(1.0));
  }
  auto degenerate = make_mesh({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 2}});
  CHECK(sample_points(degenerate, 10.0, 1).empty());
}

TEST_CASE("k-d tree matches brute force") {
  Rng rng(11);
  std::vector<Vec3> pts;
  for (int i = 0; i < 600; ++i) pts.emplace_back(uniform(rng, 0, 10), uniform(rng, 0, 10), std::floor(uniform(rng, 0, 4)));
  for (int i = 0; i < 50; ++i) pts.push_back(pts[i]);  // exact duplicates exercise tie-breaking
  const KdTree3 tree(pts);
  for (int q = 0; q < 200; ++q) {
    const Vec3 x(uniform(rng, -1, 11), uniform(rng, -1, 11), uniform(rng, -1, 5));
    std::vector<Neighbor> all;
    for (std::size_t i = 0; i < pts.size(); ++i) all.push_back({static_cast<int>(i), (pts[i] - x).squaredNorm()});
    std::sort(all.begin(), all.end());
    const auto nn = tree.nearest(x);
    CHECK(nn.index == all[0].index);
    const auto k = tree.knn(x, 9);
    for (int i = 0; i < 9; ++i) CHECK(k[i].index == all[i].index);
    const double r = uniform(rng, 0, 3);
    std::vector<std::int32_t> in;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if ((pts[i] - x).squaredNorm() <= r * r) in.push_back(static_cast<int>(i));
    CHECK(tree.radius(x, r) == in);
  }
}
