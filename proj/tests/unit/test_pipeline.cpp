#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "pss/mesh_io.hpp"
#include "pss/pipeline.hpp"

using namespace pss;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("pss_unit_" + name);
  fs::remove_all(p);
  return p;
}

SynthParams small_tile(std::uint64_t seed) {
  SynthParams p;
  p.ground_size = 32;
  p.boxes = 2;
  p.trees = 1;
  p.vehicles = 1;
  p.seed = seed;
  return p;
}

PipelineConfig small_config() {
  PipelineConfig c;
  c.forest.trees = 10;
  c.threads = 1;
  return c;
}

// Writes two small labeled tiles once and returns their paths.
const std::array<fs::path, 2>& tiles() {
  static const std::array<fs::path, 2> paths = [] {
    std::array<fs::path, 2> out;
    for (std::uint64_t s = 0; s < 2; ++s) {
      const auto dir = scratch("tile" + std::to_string(s));
      cmd_synth(small_tile(s), dir);
      out[s] = dir / "synth_tile.ply";
    }
    return out;
  }();
  return paths;
}

bool contains_notice(const std::vector<std::string>& notices, const std::string& needle) {
  return std::any_of(notices.begin(), notices.end(),
                     [&](const std::string& n) { return n.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = PipelineConfig::from_json(small_config().to_json());
  CHECK(c.to_json() == small_config().to_json());
  nlohmann::json j = small_config().to_json();
  j["lamda_d"] = 1.0;
  try {
    PipelineConfig::from_json(j);
    FAIL("unknown key accepted");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("lamda_d") != std::string::npos);
  }
  nlohmann::json nested = small_config().to_json();
  nested["growth"]["lambda_x"] = 1.0;
  CHECK_THROWS_AS(PipelineConfig::from_json(nested), InputError);

  auto bad = small_config();
  bad.growth.lambda_d = -1.0;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = small_config();
  bad.graph.parallel_angle_deg = 200.0;
  CHECK_THROWS_AS(bad.validate(), InputError);
  CHECK_THROWS_AS(load_config("/nonexistent/pss.json"), IoError);
}

TEST_CASE("library pipeline") {
  const auto cfg = small_config();
  std::vector<TriangleMesh> corpus{load_mesh(tiles()[0])};
  const auto models = train_models(corpus, cfg);
  CHECK(models.planarity_training_accuracy > 0.8);

  TriangleMesh test = load_mesh(tiles()[1]);
  SUBCASE("with ground truth and a semantic model") {
    std::vector<std::string> stages;
    const auto a = analyze(test, cfg, models.planarity, &models.semantic, {},
                           [&](const std::string& s, double) { stages.push_back(s); });
    CHECK(a.overseg.has_value());
    CHECK(a.semantic.has_value());
    CHECK(a.upper_bound.has_value());
    CHECK(a.predicted_face_labels.size() == test.num_faces());
    CHECK(stages.front() == "preprocess");
    CHECK(std::find(stages.begin(), stages.end(), "classify") != stages.end());
  }
  SUBCASE("without ground truth") {
    test.face_label.clear();
    const auto a = analyze(test, cfg, models.planarity, &models.semantic);
    CHECK_FALSE(a.overseg.has_value());
    CHECK_FALSE(a.semantic.has_value());
    CHECK(contains_notice(a.notices, "no ground-truth labels"));
    CHECK(a.predictions.size() == a.segmentation.size());
  }
  SUBCASE("without a semantic model") {
    const auto a = analyze(test, cfg, models.planarity, nullptr);
    CHECK(a.predictions.empty());
    CHECK(contains_notice(a.notices, "no semantic model"));
    CHECK(a.overseg.has_value());
    CHECK_FALSE(a.semantic.has_value());
  }
  SUBCASE("ground truth that is not co-indexed") {
    AnalysisOptions opt;
    opt.gt_labels.assign(test.num_faces() + 3, 0);
    try {
      analyze(test, cfg, models.planarity, nullptr, opt);
      FAIL("mismatch accepted");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("co-indexed") != std::string::npos);
    }
  }
  SUBCASE("empty training corpus") {
    CHECK_THROWS_AS(train_models({}, cfg), InputError);
    auto c = cfg;
    c.output_dir = scratch("train_empty");
    CHECK_THROWS_AS(cmd_train(c), InputError);
  }
}

TEST_CASE("run directory marks partial outputs") {
  const auto dir = scratch("partial");
  RunDirectory rd(dir);
  rd.write_text("a.txt", "x");
  rd.write_json("b.json", nlohmann::ordered_json::object());
  CHECK(rd.outputs().size() == 2);
  rd.mark_partial();
  CHECK(fs::exists(dir / "a.txt.partial"));
  CHECK(fs::exists(dir / "b.json.partial"));
  CHECK_FALSE(fs::exists(dir / "a.txt"));

  // A failing command leaves no manifest behind.
  auto c = small_config();
  c.input = tiles()[1];
  c.output_dir = scratch("segment_fail");
  c.planarity_model = dir / "missing.pssf";
  CHECK_THROWS_AS(cmd_segment(c), IoError);
  CHECK_FALSE(fs::exists(c.output_dir / "manifest.json"));
}

TEST_CASE("manifest round trip") {
  RunManifest m;
  m.command = "synth";
  m.tool_version = tool_version();
  m.stages = {{"synth", 0.5}};
  m.outputs = {{"synth_tile.ply", "0123456789abcdef"}};
  m.notices = {"hello"};
  const auto back = RunManifest::from_json(nlohmann::json::parse(m.to_json().dump()));
  CHECK(back.to_json() == m.to_json());
  CHECK_THROWS_AS(RunManifest::from_json(nlohmann::json::object()), ParseError);
}

TEST_CASE("pipeline runs are reproducible") {
  auto c = small_config();
  c.input = tiles()[1];
  c.training_meshes = {tiles()[0]};
  c.output_dir = scratch("run_a");
  const auto a = cmd_pipeline(c);
  c.output_dir = scratch("run_b");
  const auto b = cmd_pipeline(c);
  CHECK(a.output_hashes().size() >= 10);
  CHECK(a.output_hashes() == b.output_hashes());
  const auto on_disk = RunManifest::from_json(nlohmann::json::parse(std::ifstream(c.output_dir / "manifest.json")));
  CHECK(on_disk.output_hashes() == b.output_hashes());

#ifdef PSS_CLI_PATH
  SUBCASE("the command-line tool writes identical files") {
    const auto out = scratch("run_cli");
    const std::string cmd = std::string("\"") + PSS_CLI_PATH + "\" pipeline -i \"" + tiles()[1].string() +
                            "\" --train \"" + tiles()[0].string() + "\" -o \"" + out.string() +
                            "\" --trees 10 --threads 1 2>/dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    const auto cli = RunManifest::from_json(nlohmann::json::parse(std::ifstream(out / "manifest.json")));
    CHECK(cli.output_hashes() == a.output_hashes());
  }
  SUBCASE("the command-line tool reports bad input with exit code 2") {
    const auto out = scratch("run_missing");
    const std::string cmd = std::string("\"") + PSS_CLI_PATH + "\" preprocess -i /nonexistent/mesh.ply -o \"" +
                            out.string() + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 2);
  }
#endif
}

TEST_CASE("evaluation commands") {
  EvalInputs in;
  in.predicted = tiles()[0];
  in.ground_truth = tiles()[1];
  in.output_dir = scratch("eval_mismatch");
  const auto m0 = load_mesh(tiles()[0]), m1 = load_mesh(tiles()[1]);
  REQUIRE(m0.num_faces() != m1.num_faces());
  try {
    cmd_eval_semantic(in);
    FAIL("mismatch accepted");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("co-indexed") != std::string::npos);
  }
  in.ground_truth.clear();
  in.output_dir = scratch("eval_self");
  cmd_eval_semantic(in);
  const auto rep = nlohmann::json::parse(std::ifstream(in.output_dir / "semantic_report.json"));
  CHECK(rep["oa"].get<double>() == 1.0);
}

TEST_CASE("synthetic tiles") {
  const auto a = synth_tile(small_tile(2));
  const auto b = synth_tile(small_tile(2));
  CHECK(a.mesh.same_content(b.mesh));
  CHECK(content_hash(a.mesh) == content_hash(b.mesh));
  CHECK(content_hash(synth_tile(small_tile(3)).mesh) != content_hash(a.mesh));

  SynthParams one;
  one.ground_size = 24;
  one.boxes = 1;
  one.trees = 0;
  one.vehicles = 0;
  CHECK(synth_tile(one).gt_components == 2);
}
