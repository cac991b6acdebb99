#include <doctest.h>

#include <map>
#include <numeric>

#include "fixtures.hpp"
#include "pss/metrics.hpp"
#include "oracles.hpp"

using namespace pss;
using pss::testing::grid_mesh;

namespace {

// Labels a grid strip by the column of each face: cuts at the given x values.
std::vector<std::int32_t> column_labels(const TriangleMesh& m, std::initializer_list<double> cuts) {
  std::vector<std::int32_t> out(m.num_faces(), 0);
  for (std::size_t f = 0; f < m.num_faces(); ++f)
    for (double c : cuts)
      if (m.face_centroid[f].x() > c) ++out[f];
  return out;
}

}  // namespace

TEST_CASE("object purity") {
  SUBCASE("one segment over components of areas 3 and 1") {
    const std::vector<std::int32_t> seg{0, 0}, gt{0, 1};
    const std::vector<double> area{3.0, 1.0};
    CHECK(object_purity(seg, gt, area) == 0.75);
  }
  SUBCASE("s1 inside g1, s2 across g1 and g2") {
    const std::vector<std::int32_t> seg{0, 1, 1}, gt{0, 0, 1};
    const std::vector<double> area{4.0, 1.0, 3.0};
    CHECK(object_purity(seg, gt, area) == 0.875);
  }
  SUBCASE("identity and unlabeled faces") {
    const std::vector<std::int32_t> seg{0, 1, 2}, gt{0, 1, -1};
    const std::vector<double> area{1.0, 2.0, 5.0};
    CHECK(object_purity(seg, gt, area) == 1.0);
    const std::vector<std::int32_t> none{-1, -1, -1};
    CHECK_THROWS_AS(object_purity(seg, none, area), InputError);
  }
  SUBCASE("splitting a segment never lowers purity") {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
      const std::size_t n = 2 + uniform_index(rng, 20);
      std::vector<std::int32_t> seg(n), gt(n);
      std::vector<double> area(n);
      for (std::size_t i = 0; i < n; ++i) {
        seg[i] = static_cast<std::int32_t>(uniform_index(rng, 4));
        gt[i] = static_cast<std::int32_t>(uniform_index(rng, 3));
        area[i] = 0.5 + uniform01(rng);
      }
      const double before = object_purity(seg, gt, area);
      auto split = seg;
      for (std::size_t i = 0; i < n; ++i)
        if (uniform01(rng) < 0.5) split[i] += 10;
      CHECK(object_purity(split, gt, area) >= before - 1e-12);
      CHECK(before <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("boundary sets") {
  const auto m = grid_mesh(10, 3);
  const auto adj = AdjacencyIndex::build(m);
  CHECK(boundary_set(adj, std::vector<std::int32_t>(m.num_faces(), 7)).edges.empty());

  const auto strip = boundary_set(adj, column_labels(m, {5.0}));
  CHECK(strip.edges.size() == 3);
  CHECK(strip.length == doctest::Approx(3.0));
  for (auto e : strip.edges) {
    CHECK(m.vertices[adj.edges()[e].v0].x() == 5.0);
    CHECK(m.vertices[adj.edges()[e].v1].x() == 5.0);
  }

  std::vector<std::int32_t> own(m.num_faces());
  std::iota(own.begin(), own.end(), 0);
  std::size_t interior = 0;
  for (const auto& e : adj.edges()) interior += e.f1 >= 0;
  CHECK(boundary_set(adj, own).edges.size() == interior);

  SUBCASE("unlabeled faces") {
    auto labels = column_labels(m, {5.0});
    labels[0] = -1;
    CHECK(boundary_set(adj, labels, true).edges.size() == 3);
    CHECK(boundary_set(adj, labels, false).edges.size() > 3);
  }
}

TEST_CASE("boundary matching with ring tolerance") {
  const auto m = grid_mesh(12, 4);
  const auto adj = AdjacencyIndex::build(m);
  const auto a = boundary_set(adj, column_labels(m, {5.0}));
  const auto b = boundary_set(adj, column_labels(m, {6.0}));
  CHECK(match_boundaries(a, a, adj, 0).edges == a.edges);
  CHECK(match_boundaries(a, b, adj, 2).edges == a.edges);
  CHECK(match_boundaries(a, b, adj, 0).edges.empty());
  CHECK(match_boundaries(a, BoundarySet{}, adj, 2).edges.empty());

  CHECK(boundary_precision(a, b, adj, 2).value == 1.0);
  CHECK(boundary_recall(a, b, adj, 2).value == 1.0);
  CHECK(boundary_precision(a, b, adj, 0).value == 0.0);
  CHECK(boundary_recall(a, b, adj, 0).value == 0.0);
}

TEST_CASE("boundary precision and recall conventions") {
  const auto m = grid_mesh(20, 4);
  const auto adj = AdjacencyIndex::build(m);
  const auto g = boundary_set(adj, column_labels(m, {10.0}));
  const auto superset = boundary_set(adj, column_labels(m, {2.0, 10.0}));
  const auto bp = boundary_precision(superset, g, adj);
  CHECK(bp.value == doctest::Approx(g.length / superset.length));
  CHECK(bp.value == doctest::Approx(0.5));
  CHECK(boundary_recall(superset, g, adj).value == 1.0);

  const auto g2 = boundary_set(adj, column_labels(m, {3.0, 15.0}));
  const auto s2 = boundary_set(adj, column_labels(m, {3.0}));
  CHECK(boundary_recall(s2, g2, adj).value == doctest::Approx(0.5));
  CHECK(boundary_precision(s2, g2, adj).value == 1.0);

  const BoundarySet empty;
  const auto both = boundary_precision(empty, empty, adj);
  CHECK(both.value == 1.0);
  CHECK(both.empty_convention);
  const auto only_s = boundary_precision(empty, g, adj);
  CHECK(only_s.value == 0.0);
  CHECK(only_s.empty_convention);
  const auto br_empty = boundary_recall(g, empty, adj);
  CHECK(br_empty.value == 1.0);
  CHECK(br_empty.empty_convention);
  CHECK(boundary_recall(empty, g, adj).value == 0.0);
}

TEST_CASE("evaluate_overseg on ground-truth components") {
  const auto m = grid_mesh(8, 8);
  const auto adj = AdjacencyIndex::build(m);
  std::vector<std::int32_t> gt(m.num_faces());
  for (std::size_t f = 0; f < m.num_faces(); ++f)
    gt[f] = (m.face_centroid[f].x() > 4) + 2 * (m.face_centroid[f].y() > 3);
  const auto comps = face_connected_components(adj, gt);
  const auto r = evaluate_overseg(m, adj, comps, gt);
  CHECK(r.op == 1.0);
  CHECK(r.bp.value == 1.0);
  CHECK(r.br.value == 1.0);
  CHECK(r.segment_count == 4);
  CHECK(r.gt_component_count == 4);
  CHECK(overseg_csv_header() == "segments,op,bp,br");
  const auto j = to_json(r);
  CHECK(j.contains("op"));
  CHECK_FALSE(to_text(r).empty());
}

TEST_CASE("semantic metrics") {
  SUBCASE("perfect prediction") {
    const std::vector<std::int32_t> y{0, 1, 2, 1};
    const std::vector<double> area{1, 2, 3, 4};
    const auto r = semantic_metrics(y, y, area);
    CHECK(r.oa == 1.0);
    CHECK(r.miou == 1.0);
    for (const auto& c : r.per_class) CHECK(c.iou == 1.0);
  }
  SUBCASE("two faces, areas 1 and 3, one wrong") {
    const std::vector<std::int32_t> gt{0, 1}, pred{0, 0};
    const std::vector<double> area{1.0, 3.0};
    const auto r = semantic_metrics(pred, gt, area);
    REQUIRE(r.classes == std::vector<std::int32_t>{0, 1});
    CHECK(r.confusion[0] == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(r.confusion[1] == std::vector<double>{3.0, 0.0, 0.0});
    CHECK(r.oa == 0.25);
    CHECK(r.per_class[0].precision == 0.25);
    CHECK(r.per_class[0].recall == 1.0);
    CHECK(r.per_class[0].iou == 0.25);
    CHECK(r.per_class[0].f1 == doctest::Approx(0.4));
    CHECK(r.per_class[1].iou == 0.0);
    CHECK(r.per_class[1].undefined);
    CHECK(r.miou == 0.125);
    CHECK(r.macc == 0.5);
  }
  SUBCASE("class absent from both is excluded from the means") {
    const std::vector<std::int32_t> gt{0, 1}, pred{0, 1};
    const std::vector<double> area{1.0, 1.0};
    const std::vector<std::int32_t> classes{0, 1, 2};
    const auto r = semantic_metrics(pred, gt, area, classes);
    CHECK(r.per_class.size() == 3);
    CHECK(r.miou == 1.0);
    CHECK(r.macc == 1.0);
  }
  SUBCASE("missing predictions count as wrong; unlabeled gt is ignored") {
    const std::vector<std::int32_t> gt{0, 0, -1}, pred{0, -1, 0};
    const std::vector<double> area{1.0, 1.0, 5.0};
    const auto r = semantic_metrics(pred, gt, area);
    CHECK(r.oa == 0.5);
    CHECK(r.labeled_area == 2.0);
    CHECK(r.unlabeled_area == 5.0);
    CHECK(r.confusion[0].back() == 1.0);
  }
  SUBCASE("random cases against a direct tally") {
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
      const std::size_t n = 1 + uniform_index(rng, 30);
      std::vector<std::int32_t> gt(n), pred(n);
      std::vector<double> area(n);
      for (std::size_t i = 0; i < n; ++i) {
        gt[i] = static_cast<std::int32_t>(uniform_index(rng, 4)) - 1;
        pred[i] = static_cast<std::int32_t>(uniform_index(rng, 4)) - 1;
        area[i] = pss::testing::dyadic(rng, 0.25, 2.0);
      }
      if (std::all_of(gt.begin(), gt.end(), [](int g) { return g < 0; })) gt[0] = 0;
      const auto r = semantic_metrics(pred, gt, area);
      std::map<std::int32_t, double> tp, gt_area, pred_area;
      double correct = 0, labeled = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (gt[i] < 0) continue;
        labeled += area[i];
        gt_area[gt[i]] += area[i];
        if (pred[i] >= 0) pred_area[pred[i]] += area[i];
        if (pred[i] == gt[i]) {
          tp[gt[i]] += area[i];
          correct += area[i];
        }
      }
      CHECK(r.oa == doctest::Approx(correct / labeled));
      double miou = 0;
      for (const auto& [c, ga] : gt_area) miou += tp[c] / (ga + pred_area[c] - tp[c]);
      miou /= static_cast<double>(gt_area.size());
      CHECK(r.miou == doctest::Approx(miou));
    }
  }
}

TEST_CASE("maximum achievable labeling") {
  SUBCASE("segments equal to components") {
    const std::vector<std::int32_t> gt{0, 0, 1, 2}, seg{0, 0, 1, 2};
    const std::vector<double> area{1, 1, 1, 1};
    CHECK(max_achievable(seg, gt, area).miou == 1.0);
  }
  SUBCASE("3 m2 of A and 1 m2 of B in one segment") {
    const std::vector<std::int32_t> gt{0, 1}, seg{0, 0};
    const std::vector<double> area{3.0, 1.0};
    CHECK(majority_labels(seg, gt, area) == std::vector<std::int32_t>{0, 0});
    const auto r = max_achievable(seg, gt, area);
    CHECK(r.per_class[0].iou == 0.75);
    CHECK(r.per_class[1].iou == 0.0);
    CHECK(r.confusion[1][0] == 1.0);
  }
  SUBCASE("ties go to the lower id; unlabeled faces do not vote") {
    const std::vector<std::int32_t> gt{3, 1, -1, -1}, seg{0, 0, 0, 1};
    const std::vector<double> area{2.0, 2.0, 10.0, 1.0};
    CHECK(majority_labels(seg, gt, area) == std::vector<std::int32_t>{1, 1, 1, -1});
  }
}
