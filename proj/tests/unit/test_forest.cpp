#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "pss/face_features.hpp"
#include "pss/forest.hpp"
#include "pss/synth.hpp"

using namespace pss;

namespace {

DecisionTree leaf_tree(std::vector<double> probs) {
  DecisionTree t;
  TreeNode n;
  n.leaf = 0;
  t.nodes.push_back(n);
  t.leaf_probs = std::move(probs);
  return t;
}

FeatureTable table(std::size_t cols, std::size_t rows) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  return FeatureTable(names, rows);
}

struct Dataset {
  FeatureTable x;
  std::vector<std::int32_t> y;
};

Dataset separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d{table(4, n), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double f0 = uniform01(rng);
    d.x.at(i, 0) = f0;
    for (std::size_t c = 1; c < 4; ++c) d.x.at(i, c) = uniform01(rng);
    d.y.push_back(f0 > 0.5 ? 1 : 0);
  }
  return d;
}

double accuracy(const ForestModel& m, const Dataset& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.y.size(); ++i) ok += m.predict(d.x.row(i), d.x.layout_version()).label == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(d.y.size());
}

}  // namespace

TEST_CASE("prediction aggregates") {
  const auto layout = table(1, 0).layout_version();
  const std::vector<double> x{0.0};
  SUBCASE("one tree, leaf (0.1, 0.9)") {
    ForestModel m({0, 1}, 1, layout, 0, {leaf_tree({0.1, 0.9})});
    const auto p = m.predict(x, layout);
    CHECK(p.log_mean[1] == doctest::Approx(std::log(0.9)));
    CHECK(p.log_mean[1] == doctest::Approx(-0.10536).epsilon(1e-4));
    CHECK(p.geometric_mean[1] == doctest::Approx(0.9));
    CHECK(p.label == 1);
  }
  SUBCASE("two trees 0.9 and 0.4 give geometric mean 0.6") {
    ForestModel m({0, 1}, 1, layout, 0, {leaf_tree({0.1, 0.9}), leaf_tree({0.6, 0.4})});
    const auto p = m.predict(x, layout);
    CHECK(p.geometric_mean[1] == doctest::Approx(0.6));
    CHECK(p.probabilities[0] + p.probabilities[1] == doctest::Approx(1.0));
    SUBCASE("tree order does not matter") {
      ForestModel r({0, 1}, 1, layout, 0, {leaf_tree({0.6, 0.4}), leaf_tree({0.1, 0.9})});
      CHECK(r.predict(x, layout).probabilities == p.probabilities);
    }
  }
  SUBCASE("all trees certain of class 0") {
    ForestModel m({0, 1}, 1, layout, 0, {leaf_tree({1.0, 0.0}), leaf_tree({1.0, 0.0})});
    const auto p = m.predict(x, layout);
    CHECK(p.label == 0);
    CHECK(p.geometric_mean[1] == doctest::Approx(kProbabilityFloor));
    FeatureTable t = table(1, 1);
    const auto pm = planarity_map(m, t);
    CHECK(pm.label[0] == 0);
    CHECK(pm.nonplanar[0] == std::exp(pm.log_nonplanar[0]));
    CHECK(pm.nonplanar[0] == doctest::Approx(kProbabilityFloor));
  }
  SUBCASE("ties go to the lower class") {
    ForestModel m({2, 5}, 1, layout, 0, {leaf_tree({0.5, 0.5})});
    CHECK(m.predict(x, layout).label == 2);
  }
  SUBCASE("layout mismatch") {
    ForestModel m({0, 1}, 1, layout, 0, {leaf_tree({0.5, 0.5})});
    CHECK_THROWS_AS(m.predict(x, layout + 1), InputError);
    CHECK_THROWS_AS(m.predict(std::vector<double>{1, 2}, layout), InputError);
  }
  SUBCASE("planarity_map needs classes {0, 1}") {
    ForestModel m({0, 2}, 1, layout, 0, {leaf_tree({0.5, 0.5})});
    FeatureTable t = table(1, 1);
    CHECK_THROWS_AS(planarity_map(m, t), InputError);
  }
}

TEST_CASE("training") {
  const auto train = separable(400, 1);
  ForestParams p;
  p.trees = 20;
  p.seed = 7;
  SUBCASE("perfectly separable by feature 0") {
    const auto m = train_forest(train.x, train.y, p);
    CHECK(accuracy(m, train) == 1.0);
    CHECK(accuracy(m, separable(400, 2)) >= 0.95);
    for (const auto& t : m.trees()) {
      for (const auto& n : t.nodes)
        if (n.feature >= 0) CHECK(n.feature < 4);
      for (std::size_t l = 0; l < t.leaf_probs.size(); l += 2)
        CHECK(t.leaf_probs[l] + t.leaf_probs[l + 1] == doctest::Approx(1.0));
    }
  }
  SUBCASE("deterministic under seed, independent of thread count") {
    const auto a = train_forest(train.x, train.y, p);
    ForestParams q = p;
    q.threads = 3;
    const auto b = train_forest(train.x, train.y, q);
    CHECK(a.serialize() == b.serialize());
    q.seed = 8;
    CHECK(train_forest(train.x, train.y, q).serialize() != a.serialize());
  }
  SUBCASE("deeper trees never lose training accuracy") {
    Rng rng(4);
    Dataset noisy{table(3, 300), {}};
    for (std::size_t i = 0; i < 300; ++i) {
      for (std::size_t c = 0; c < 3; ++c) noisy.x.at(i, c) = uniform01(rng);
      noisy.y.push_back(static_cast<int>(uniform_index(rng, 2)));
    }
    double prev = 0;
    for (int depth : {1, 2, 4, 8, 16}) {
      ForestParams dp = p;
      dp.max_depth = depth;
      dp.min_leaf = 1;
      const double acc = accuracy(train_forest(noisy.x, noisy.y, dp), noisy);
      CHECK(acc >= prev);
      prev = acc;
    }
  }
  SUBCASE("class weights raise minority recall") {
    Rng rng(9);
    Dataset imb{table(2, 1000), {}};
    for (std::size_t i = 0; i < 1000; ++i) {
      const bool minority = i % 10 == 0;
      imb.x.at(i, 0) = uniform(rng, 0, 1) + (minority ? 0.4 : 0.0);
      imb.x.at(i, 1) = uniform01(rng);
      imb.y.push_back(minority ? 1 : 0);
    }
    auto recall1 = [&](const ForestModel& m) {
      std::size_t hit = 0, n = 0;
      for (std::size_t i = 0; i < imb.y.size(); ++i)
        if (imb.y[i] == 1) {
          ++n;
          hit += m.predict(imb.x.row(i), imb.x.layout_version()).label == 1;
        }
      return static_cast<double>(hit) / static_cast<double>(n);
    };
    ForestParams wp = p;
    wp.min_leaf = 20;
    const auto base = train_forest(imb.x, imb.y, wp);
    auto w = ClassWeights::uniform(imb.y);
    w.weights[1] = 2.0;
    const auto weighted = train_forest(imb.x, imb.y, wp, &w);
    CHECK(recall1(weighted) >= recall1(base));
    const auto bal = ClassWeights::balanced(imb.y);
    CHECK(bal.of(0) == doctest::Approx(std::sqrt(1000.0 / 900.0)));
    CHECK(bal.of(1) == doctest::Approx(std::sqrt(1000.0 / 100.0)));
  }
  SUBCASE("errors") {
    std::vector<std::int32_t> one(train.y.size(), 1);
    CHECK_THROWS_AS(train_forest(train.x, one, p), InputError);
    auto bad = train;
    bad.x.at(17, 2) = std::nan("");
    try {
      train_forest(bad.x, bad.y, p);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("17") != std::string::npos);
    }
  }
}

TEST_CASE("model serialization") {
  const auto d = separable(200, 3);
  ForestParams p;
  p.trees = 10;
  const auto m = train_forest(d.x, d.y, p);
  const auto path = std::filesystem::temp_directory_path() / "pss_unit_model.pssf";
  m.save(path);
  const auto back = ForestModel::load(path);
  CHECK(back.serialize() == m.serialize());
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x{uniform01(rng), uniform01(rng), uniform01(rng), uniform01(rng)};
    CHECK(back.predict(x, d.x.layout_version()).probabilities == m.predict(x, d.x.layout_version()).probabilities);
  }
  std::string bytes = m.serialize();
  SUBCASE("corrupted magic") {
    bytes[0] = 'X';
    CHECK_THROWS_AS(ForestModel::deserialize(bytes), ParseError);
  }
  SUBCASE("old version tag") {
    bytes[4] = 0;
    try {
      ForestModel::deserialize(bytes);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
  }
  SUBCASE("truncated") { CHECK_THROWS_AS(ForestModel::deserialize(bytes.substr(0, bytes.size() - 3)), ParseError); }
  SUBCASE("trailing bytes") { CHECK_THROWS_AS(ForestModel::deserialize(bytes + "x"), ParseError); }
}

TEST_CASE("classify_segments") {
  const auto d = separable(300, 5);
  ForestParams p;
  p.trees = 15;
  const auto m = train_forest(d.x, d.y, p);
  FeatureTable one = table(4, 1);
  one.at(0, 0) = 0.9;
  const auto preds = classify_segments(m, one);
  REQUIRE(preds.size() == 1);
  CHECK(preds[0].label == 1);
  const auto test = separable(300, 6);
  const auto all = classify_segments(m, test.x, 2);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < all.size(); ++i) ok += all[i].label == test.y[i];
  CHECK(static_cast<double>(ok) / 300.0 >= 0.95);
  CHECK(classify_segments(m, test.x, 1)[7].probabilities == all[7].probabilities);
}

TEST_CASE("planarity map: plane vs sphere") {
  using pss::testing::grid_mesh;
  auto plane = grid_mesh(20, 20, 0.5);
  auto sphere = icosphere(3, Vec3(5, 5, 6), 3.0);
  auto scene = pss::testing::merge(plane, sphere);
  const auto ff = compute_face_features(scene);
  std::vector<std::int32_t> labels(scene.num_faces(), 0);
  for (std::size_t f = plane.num_faces(); f < scene.num_faces(); ++f) labels[f] = 1;
  ForestParams p;
  p.trees = 30;
  const auto w = ClassWeights::balanced(labels);
  const auto model = train_forest(ff, labels, p, &w);

  auto test_plane = grid_mesh(16, 16, 0.7);
  for (auto& v : test_plane.vertices) v.z() = 0.2;
  test_plane.update_geometry();
  const auto pm = planarity_map(model, compute_face_features(test_plane));
  std::size_t planar = 0;
  for (auto l : pm.label) planar += l == 0;
  CHECK(static_cast<double>(planar) >= 0.95 * static_cast<double>(pm.size()));
  for (std::size_t f = 0; f < pm.size(); ++f) {
    CHECK(pm.nonplanar[f] >= 0.0);
    CHECK(pm.nonplanar[f] <= 1.0);
  }
}
