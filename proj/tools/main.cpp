#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pss/config.hpp"
#include "pss/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string input, output_dir, planarity_model, semantic_model, ground_truth;
  std::vector<std::string> training_meshes;
  std::optional<double> weld_eps, lambda_d, lambda_m, lambda_g, parallel_angle, ground_radius, sampling_density;
  std::optional<std::string> proximity, prior;
  std::optional<int> trees, min_leaf, max_depth, rings;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool feature_block = false;
};

void add_pipeline_options(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("-i,--input", o.input, "input mesh (PLY or OBJ)");
  app->add_option("-o,--output-dir", o.output_dir, "run directory");
  app->add_option("--planarity-model", o.planarity_model, "planarity forest (.pssf)");
  app->add_option("--semantic-model", o.semantic_model, "semantic forest (.pssf)");
  app->add_option("--ground-truth", o.ground_truth, "mesh carrying ground-truth face labels");
  app->add_option("--train", o.training_meshes, "labeled training meshes");
  app->add_option("--weld-eps", o.weld_eps, "vertex weld distance in meters");
  app->add_option("--lambda-d", o.lambda_d, "data term weight");
  app->add_option("--lambda-m", o.lambda_m, "smoothness weight");
  app->add_option("--lambda-g", o.lambda_g, "planarity prior weight");
  app->add_option("--prior", o.prior, "prior domain")->check(CLI::IsMember({"probability", "log"}));
  app->add_option("--parallel-angle-deg", o.parallel_angle, "parallelism angle threshold");
  app->add_option("--ground-radius-m", o.ground_radius, "connecting-ground search radius");
  app->add_option("--proximity", o.proximity, "proximity mode")->check(CLI::IsMember({"knn", "delaunay"}));
  app->add_option("--sampling-density", o.sampling_density, "surface samples per square meter");
  app->add_option("--trees", o.trees, "trees per forest");
  app->add_option("--min-leaf", o.min_leaf, "minimum samples per leaf");
  app->add_option("--max-depth", o.max_depth, "maximum tree depth");
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--rings", o.rings, "boundary tolerance in edge rings");
  app->add_option("--threads", o.threads, "worker threads (0 = auto)");
  app->add_flag("--feature-block", o.feature_block, "also write the float32 graph feature block");
}

pss::PipelineConfig make_config(const Overrides& o) {
  pss::PipelineConfig c = o.config.empty() ? pss::PipelineConfig{} : pss::load_config(o.config);
  if (!o.input.empty()) c.input = o.input;
  if (!o.output_dir.empty()) c.output_dir = o.output_dir;
  if (!o.planarity_model.empty()) c.planarity_model = o.planarity_model;
  if (!o.semantic_model.empty()) c.semantic_model = o.semantic_model;
  if (!o.ground_truth.empty()) c.ground_truth = o.ground_truth;
  if (!o.training_meshes.empty()) c.training_meshes.assign(o.training_meshes.begin(), o.training_meshes.end());
  if (o.weld_eps) c.weld_epsilon = *o.weld_eps;
  if (o.lambda_d) c.growth.lambda_d = *o.lambda_d;
  if (o.lambda_m) c.growth.lambda_m = *o.lambda_m;
  if (o.lambda_g) c.growth.lambda_g = *o.lambda_g;
  if (o.prior) c.growth.prior = *o.prior == "log" ? pss::PriorDomain::log : pss::PriorDomain::probability;
  if (o.parallel_angle) c.graph.parallel_angle_deg = *o.parallel_angle;
  if (o.ground_radius) c.graph.ground_radius = *o.ground_radius;
  if (o.proximity) c.graph.proximity = pss::proximity_mode_from_name(*o.proximity);
  if (o.sampling_density) c.graph.exmat_density = *o.sampling_density;
  if (o.trees) c.forest.trees = *o.trees;
  if (o.min_leaf) c.forest.min_leaf = *o.min_leaf;
  if (o.max_depth) c.forest.max_depth = *o.max_depth;
  if (o.seed) c.seed = *o.seed;
  if (o.rings) c.rings = *o.rings;
  if (o.threads) c.threads = *o.threads;
  if (o.feature_block) c.write_feature_block = true;
  c.validate();
  return c;
}

void print_summary(const pss::RunManifest& m, const std::filesystem::path& dir) {
  for (const auto& n : m.notices) std::cerr << "notice: " << n << '\n';
  std::cout << m.command << ": wrote " << m.outputs.size() + 1 << " files to " << dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planarity-sensitive mesh over-segmentation and segment graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pss::tool_version());

  Overrides o;
  struct Eval {
    std::string predicted, ground_truth, output_dir = "run", config;
    int rings = 2;
  } ev;
  pss::SynthParams sp;
  std::string synth_out = "run";

  const std::pair<const char*, const char*> pipeline_cmds[] = {
      {"preprocess", "weld vertices and repair non-manifold edges"},
      {"train", "train the planarity and semantic forests"},
      {"segment", "planarity-sensitive over-segmentation"},
      {"graph", "build the segment graph of a segmented mesh"},
      {"classify", "classify the segments of a segmented mesh"},
      {"pipeline", "run every stage end to end"},
  };
  for (const auto& [name, desc] : pipeline_cmds) add_pipeline_options(app.add_subcommand(name, desc), o);

  const std::pair<const char*, const char*> eval_cmds[] = {
      {"eval-overseg", "over-segmentation metrics"},
      {"eval-semantic", "semantic labeling metrics"},
      {"upper-bound", "best labeling achievable from the segments"},
  };
  for (const auto& [name, desc] : eval_cmds) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("predicted", ev.predicted, "predicted mesh")->required();
    sub->add_option("ground_truth", ev.ground_truth, "ground-truth mesh (default: labels of the predicted mesh)");
    sub->add_option("-o,--output-dir", ev.output_dir, "run directory");
    sub->add_option("--rings", ev.rings, "boundary tolerance in edge rings");
    sub->add_option("--config", ev.config, "JSON config file (class table)")->check(CLI::ExistingFile);
  }

  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic urban tile");
  synth->add_option("--ground-size", sp.ground_size, "tile edge length in meters");
  synth->add_option("--boxes", sp.boxes, "building count");
  synth->add_option("--trees", sp.trees, "tree count");
  synth->add_option("--vehicles", sp.vehicles, "vehicle count");
  synth->add_option("--noise", sp.noise, "relative radial noise of the trees");
  synth->add_option("--seed", sp.seed, "random seed");
  synth->add_option("-o,--output-dir", synth_out, "run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "synth") {
      sp.validate();
      print_summary(pss::cmd_synth(sp, synth_out), synth_out);
      return 0;
    }
    if (name == "eval-overseg" || name == "eval-semantic" || name == "upper-bound") {
      const pss::PipelineConfig cfg = ev.config.empty() ? pss::PipelineConfig{} : pss::load_config(ev.config);
      pss::EvalInputs in{ev.predicted, ev.ground_truth, ev.output_dir, ev.rings};
      const auto m = name == "eval-overseg"    ? pss::cmd_eval_overseg(in, cfg)
                     : name == "eval-semantic" ? pss::cmd_eval_semantic(in, cfg)
                                               : pss::cmd_upper_bound(in, cfg);
      print_summary(m, in.output_dir);
      return 0;
    }
    const pss::PipelineConfig cfg = make_config(o);
    pss::RunManifest m;
    if (name == "preprocess") m = pss::cmd_preprocess(cfg);
    else if (name == "train") m = pss::cmd_train(cfg);
    else if (name == "segment") m = pss::cmd_segment(cfg);
    else if (name == "graph") m = pss::cmd_graph(cfg);
    else if (name == "classify") m = pss::cmd_classify(cfg);
    else m = pss::cmd_pipeline(cfg);
    print_summary(m, cfg.output_dir);
    return 0;
  } catch (const pss::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pss::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pss::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pss::TopologyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
