#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pss/overseg.hpp"
#include "pss/plane_fit.hpp"
#include "pss/repair.hpp"
#include "pss/synth.hpp"

using namespace pss;
using pss::testing::grid_mesh;

namespace {

ProbabilityMap uniform_probmap(std::size_t n, std::uint8_t label, double nonplanar) {
  ProbabilityMap pm;
  pm.label.assign(n, label);
  pm.nonplanar.assign(n, nonplanar);
  pm.log_nonplanar.assign(n, std::log(nonplanar));
  pm.planar.assign(n, 1.0 - nonplanar);
  return pm;
}

bool edge_connected(const AdjacencyIndex& adj, const Segmentation& seg) {
  return component_count(face_connected_components(adj, seg.face_segment)) == seg.size();
}

}  // namespace

TEST_CASE("unary_cost") {
  GrowthParams p;
  SUBCASE("planar region") {
    const auto c = unary_cost(0.3, false, false, 0.0, p);
    CHECK(c.cost0 == doctest::Approx(0.3));
    CHECK(c.cost1 == doctest::Approx(0.7));
  }
  SUBCASE("non-planar face and region") {
    const auto c = unary_cost(0.5, true, true, 0.8, p);
    CHECK(c.cost0 == doctest::Approx(0.28));
    CHECK(c.cost1 == doctest::Approx(0.72));
  }
  SUBCASE("coplanar face") {
    const auto c = unary_cost(0.0, false, false, 0.0, p);
    CHECK(c.cost0 == 0.0);
    CHECK(c.cost1 == 1.0);
  }
  SUBCASE("non-planar face, planar region uses the distance") {
    const auto c = unary_cost(0.4, true, false, 0.99, p);
    CHECK(c.cost0 == doctest::Approx(0.4));
  }
  SUBCASE("large distance is not clamped") { CHECK(unary_cost(2.5, false, false, 0, p).cost1 == doctest::Approx(-1.5)); }
}

TEST_CASE("pairwise_cost") {
  CHECK(pairwise_cost(Vec3::UnitZ(), Vec3::UnitZ()) == 0.0);
  CHECK(pairwise_cost(Vec3::UnitX(), Vec3::UnitZ()) == doctest::Approx(0.5));
  CHECK(pairwise_cost(-Vec3::UnitZ(), Vec3::UnitZ()) == doctest::Approx(1.0));
  bool degenerate = false;
  CHECK(pairwise_cost(Vec3::Zero(), Vec3::UnitZ(), &degenerate) == 0.0);
  CHECK(degenerate);
  // The indicator: equal labels pay nothing.
  GrowthParams p;
  const std::vector<FrontierTerm> t{{{0.0, 1.0}, 0.5}};
  CHECK(frontier_energy(t, std::vector<std::uint8_t>{0}, p) == 0.0);
}

TEST_CASE("label_frontier") {
  SUBCASE("lambda_m = 0, planar region: added iff d < 0.5") {
    GrowthParams p;
    p.lambda_m = 0.0;
    for (double d : {0.0, 0.2, 0.49, 0.51, 0.9}) {
      const std::vector<FrontierTerm> t{{unary_cost(d, false, false, 0, p), 0.7}};
      CHECK(label_frontier(t, p)[0] == (d < 0.5 ? 0 : 1));
    }
  }
  SUBCASE("d = 0.45 at 90 degrees with unit weights joins") {
    GrowthParams p;
    p.lambda_d = 1.0;
    p.lambda_m = 1.0;
    const std::vector<FrontierTerm> t{{unary_cost(0.45, false, false, 0, p), pairwise_cost(Vec3::UnitX(), Vec3::UnitZ())}};
    CHECK(label_frontier(t, p)[0] == 0);
  }
  SUBCASE("empty frontier") { CHECK(label_frontier({}, GrowthParams{}).empty()); }
  SUBCASE("equals exhaustive minimization and the star-graph min cut") {
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
      const auto p = pss::testing::random_growth(rng);
      const auto terms = pss::testing::random_frontier(rng, 1 + uniform_index(rng, 10));
      const auto x = label_frontier(terms, p);
      CHECK(frontier_energy(terms, x, p) == pss::testing::brute_min_frontier(terms, p));
      BinaryMrf star;
      star.unary.push_back({0.0, 1e6});  // region node, held at 0
      for (std::size_t i = 0; i < terms.size(); ++i) {
        star.unary.push_back({p.lambda_d * terms[i].unary.cost0, p.lambda_d * terms[i].unary.cost1});
        star.edges.push_back({0, static_cast<std::int32_t>(i + 1), p.lambda_m * terms[i].pairwise});
      }
      const auto cut = min_cut_binary(star);
      CHECK(cut[0] == 0);
      CHECK(std::vector<std::uint8_t>(cut.begin() + 1, cut.end()) == x);
    }
  }
}

TEST_CASE("min_cut_binary") {
  SUBCASE("single node") {
    BinaryMrf m;
    m.unary.push_back({0.2, 0.8});
    CHECK(min_cut_binary(m) == std::vector<std::uint8_t>{0});
  }
  SUBCASE("two-node chain tie picks the lexicographically smaller labeling") {
    BinaryMrf m;
    m.unary = {{0, 1}, {1, 0}};
    m.edges.push_back({0, 1, 10});
    const auto x = min_cut_binary(m);
    CHECK(x == std::vector<std::uint8_t>{0, 0});
    CHECK(m.energy(x) == 1.0);
  }
  SUBCASE("equals enumeration on random graphs") {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
      const auto m = pss::testing::random_mrf(rng, 1 + uniform_index(rng, 10));
      CHECK(m.energy(min_cut_binary(m)) == pss::testing::brute_min_energy(m));
    }
  }
  SUBCASE("errors") {
    BinaryMrf m;
    m.unary = {{0, 1}, {1, 0}};
    m.edges.push_back({0, 1, -1});
    CHECK_THROWS_AS(min_cut_binary(m), InputError);
    m.edges[0] = {0, 5, 1};
    CHECK_THROWS_AS(min_cut_binary(m), InputError);
  }
}

TEST_CASE("plane refit") {
  SUBCASE("three coplanar points") {
    PlaneAccumulator acc;
    for (const Vec3& p : {Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1)}) acc.add(p);
    acc.add_orientation(Vec3::UnitZ());
    const auto fit = acc.fit({});
    CHECK_FALSE(fit.degenerate);
    CHECK(fit.plane.distance(Vec3(0.3, 0.3, 1)) == doctest::Approx(0.0));
    CHECK(fit.plane.normal.z() == doctest::Approx(1.0));
  }
  SUBCASE("collinear points keep the fallback") {
    PlaneAccumulator acc;
    for (int i = 0; i < 5; ++i) acc.add(Vec3(i, 2 * i, 0));
    Plane fallback;
    fallback.normal = Vec3::UnitX();
    fallback.offset = 3.0;
    const auto fit = acc.fit(fallback);
    CHECK(fit.degenerate);
    CHECK(fit.plane.normal == fallback.normal);
    CHECK(fit.plane.offset == 3.0);
  }
  SUBCASE("unit-cube corner: incremental equals batch") {
    std::vector<Vec3> pts;
    for (int i = 0; i <= 2; ++i)
      for (int j = 0; j <= 2; ++j) {
        pts.emplace_back(i * 0.5, j * 0.5, 0);
        pts.emplace_back(i * 0.5, 0, j * 0.5);
        pts.emplace_back(0, i * 0.5, j * 0.5);
      }
    PlaneAccumulator acc;
    for (const auto& p : pts) acc.add(p);
    const Vec3 orient(1, 1, 1);
    acc.add_orientation(orient);
    const auto a = acc.fit({}), b = fit_plane_batch(pts, orient);
    CHECK((a.plane.normal - b.plane.normal).norm() < 1e-9);
    CHECK(std::abs(a.plane.offset - b.plane.offset) < 1e-9);
  }
}

TEST_CASE("region growing") {
  SUBCASE("coplanar 10-face patch with lambda_m = 0") {
    const auto m = grid_mesh(5, 1);
    const auto adj = AdjacencyIndex::build(m);
    const auto pm = uniform_probmap(m.num_faces(), 0, 0.01);
    GrowthParams p;
    p.lambda_m = 0;
    RegionGrower g(m, adj, pm, p);
    const auto r = g.grow(3, 0);
    CHECK(r.faces.size() == 10);
    for (const auto& v : m.vertices) CHECK(r.plane.distance(v) == doctest::Approx(0.0));
  }
  SUBCASE("floor meeting a perpendicular wall") {
    const auto floor = grid_mesh(4, 4);
    auto wall = grid_mesh(4, 3);
    for (auto& v : wall.vertices) v = Vec3(v.x(), 0.0, v.y());  // x-z plane at y = 0
    wall.update_geometry();
    auto merged = pss::testing::merge(floor, wall);
    const auto m = weld_vertices(merged, 1e-9).mesh;
    const auto adj = AdjacencyIndex::build(m);
    const auto pm = uniform_probmap(m.num_faces(), 0, 0.01);
    RegionGrower g(m, adj, pm, GrowthParams{});
    const auto r = g.grow(10, 0);
    for (auto f : r.faces) CHECK(m.face_centroid[f].z() == 0.0);
    CHECK(r.faces.size() == floor.num_faces());
  }
  SUBCASE("single face") {
    const auto m = pss::testing::make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    const auto adj = AdjacencyIndex::build(m);
    const auto pm = uniform_probmap(1, 0, 0.01);
    RegionGrower g(m, adj, pm, GrowthParams{});
    CHECK(g.grow(0, 0).faces.size() == 1);
  }
  SUBCASE("region plane equals batch fit of member vertices") {
    auto surface = grid_mesh(12, 9, 0.5);
    for (auto& v : surface.vertices) v.z() = 0.15 * std::sin(v.x()) + 0.1 * std::cos(1.3 * v.y());
    surface.update_geometry();
    const auto adj = AdjacencyIndex::build(surface);
    const auto pm = uniform_probmap(surface.num_faces(), 0, 0.1);
    RegionGrower g(surface, adj, pm, GrowthParams{});
    const auto r = g.grow(0, 0);
    std::vector<std::int32_t> vs;
    for (auto f : r.faces)
      for (auto v : surface.faces[f]) vs.push_back(v);
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    std::vector<Vec3> pts;
    for (auto v : vs) pts.push_back(surface.vertices[v]);
    CHECK(r.faces.size() > 20);
    const auto batch = fit_plane_batch(pts, r.accumulator.orientation());
    CHECK(r.accumulator.count() == pts.size());
    CHECK((batch.plane.normal - r.plane.normal).norm() < 1e-9);
    CHECK(std::abs(batch.plane.offset - r.plane.offset) < 1e-9);
  }
}

TEST_CASE("oversegment") {
  SUBCASE("two parallel disjoint planes") {
    auto a = grid_mesh(4, 4);
    auto b = grid_mesh(4, 4, 1.0, 3.0);
    const auto m = pss::testing::merge(a, b);
    const auto adj = AdjacencyIndex::build(m);
    const auto seg = oversegment(m, adj, uniform_probmap(m.num_faces(), 0, 0.01));
    CHECK(seg.size() == 2);
  }
  SUBCASE("partition, connectivity, determinism") {
    const auto sphere = icosphere(3, Vec3::Zero(), 3.0);
    const auto floor = grid_mesh(10, 10, 1.0, -1.5);
    const auto m = pss::testing::merge(floor, sphere);
    const auto adj = AdjacencyIndex::build(m);
    ProbabilityMap pm = uniform_probmap(m.num_faces(), 0, 0.05);
    for (std::size_t f = floor.num_faces(); f < m.num_faces(); ++f) {
      pm.label[f] = 1;
      pm.nonplanar[f] = 0.9;
      pm.planar[f] = 0.1;
    }
    const auto seg = oversegment(m, adj, pm);
    CHECK(seg.face_segment.size() == m.num_faces());
    CHECK(edge_connected(adj, seg));
    CHECK_NOTHROW(check_segmentation(adj, seg));
    CHECK(oversegment(m, adj, pm).face_segment == seg.face_segment);
    for (std::size_t f = 0; f < floor.num_faces(); ++f) CHECK(seg.face_segment[f] == seg.face_segment[0]);
  }
  SUBCASE("lambda_g = 0 with all faces planar is distance-threshold growing") {
    const auto sphere = icosphere(3, Vec3::Zero(), 3.0);
    const auto adj = AdjacencyIndex::build(sphere);
    auto pm = uniform_probmap(sphere.num_faces(), 0, 0.3);
    GrowthParams p;
    p.lambda_g = 0.0;
    const auto a = oversegment(sphere, adj, pm, p);
    p.lambda_g = 0.9;  // prior is inert when every face is planar
    CHECK(oversegment(sphere, adj, pm, p).face_segment == a.face_segment);
  }
  CHECK_THROWS_AS(GrowthParams{-1.0}.validate(), InputError);
}
