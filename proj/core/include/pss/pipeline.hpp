#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pss/config.hpp"
#include "pss/metrics.hpp"
#include "pss/repair.hpp"
#include "pss/synth.hpp"

namespace pss {

std::string tool_version();

/// FNV-1a 64 of the file bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

struct StageTiming {
  std::string name;
  double seconds = 0.0;
};

struct OutputRecord {
  std::string file;  // name inside the run directory
  std::string hash;
};

/// Record of one command run. Timings vary between runs; everything else is
/// a function of the config and the inputs.
struct RunManifest {
  std::string command;
  std::string tool_version;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::string input_hash;
  std::vector<StageTiming> stages;
  std::vector<OutputRecord> outputs;
  std::vector<std::string> notices;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc);
  /// Output name -> hash, the part compared across runs.
  std::vector<std::pair<std::string, std::string>> output_hashes() const;
};

/// Run directory with fixed file names. Files written through it are
/// recorded; on failure they are renamed with a ".partial" suffix.
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path dir);

  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path file(const std::string& name) const { return dir_ / name; }
  void record(const std::string& name);
  void write_text(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::ordered_json& doc);
  std::vector<OutputRecord> outputs() const;
  void mark_partial();

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

nlohmann::ordered_json to_json(const RepairReport& report);

struct PreprocessResult {
  TriangleMesh mesh;
  RepairReport report;
};

/// Vertex welding followed by non-manifold repair.
PreprocessResult preprocess(const TriangleMesh& mesh, double weld_epsilon);

/// Face-level planarity training set: faces with a known class, labeled 1
/// when the class is non-planar. Degenerate faces are left out.
struct LabeledTable {
  FeatureTable features;
  std::vector<std::int32_t> labels;
};

LabeledTable planarity_training_set(const TriangleMesh& mesh, const FeatureTable& face_features,
                                    std::span<const std::int32_t> nonplanar_classes);

/// Segment-level semantic training set: one row per segment with a labeled
/// face, labeled with its area-majority class.
LabeledTable semantic_training_set(const TriangleMesh& mesh, const Segmentation& segmentation,
                                   const FeatureTable& segment_features);

/// Everything computed for one mesh.
struct Analysis {
  TriangleMesh mesh;  // repaired
  RepairReport repair;
  FeatureTable face_features;
  ProbabilityMap probmap;
  Segmentation segmentation;
  FeatureTable segment_features;
  std::optional<SegmentGraph> graph;
  std::vector<SegmentPrediction> predictions;     // empty without a semantic model
  std::vector<std::int32_t> predicted_face_labels;
  std::optional<OversegReport> overseg;
  std::optional<SemanticReport> semantic;
  std::optional<SemanticReport> upper_bound;
  std::vector<std::string> notices;
};

using StageHook = std::function<void(const std::string& stage, double seconds)>;

struct AnalysisOptions {
  bool build_graph = true;
  /// Ground-truth labels co-indexed with the input faces; empty: use the
  /// input's own labels when it has any.
  std::vector<std::int32_t> gt_labels;
};

/// preprocess -> face features -> planarity map -> over-segmentation ->
/// segment features -> graph -> classification (with a semantic model) ->
/// metrics (with ground truth). A failing stage rethrows with its name.
Analysis analyze(const TriangleMesh& input, const PipelineConfig& config, const ForestModel& planarity,
                 const ForestModel* semantic, const AnalysisOptions& options = {}, const StageHook& hook = {});

struct TrainedModels {
  ForestModel planarity;
  ForestModel semantic;
  double planarity_training_accuracy = 0.0;
  double semantic_training_accuracy = 0.0;
};

/// Trains both forests on labeled meshes (already loaded). The semantic
/// forest is trained on segments of each mesh's own over-segmentation.
TrainedModels train_models(std::span<const TriangleMesh> meshes, const PipelineConfig& config,
                           const StageHook& hook = {});

// Commands. Each writes into config.output_dir and returns the manifest it
// also stores there as manifest.json.
RunManifest cmd_preprocess(const PipelineConfig& config);
RunManifest cmd_train(const PipelineConfig& config);
RunManifest cmd_segment(const PipelineConfig& config);
RunManifest cmd_graph(const PipelineConfig& config);
RunManifest cmd_classify(const PipelineConfig& config);
RunManifest cmd_pipeline(const PipelineConfig& config);

struct EvalInputs {
  std::filesystem::path predicted;     // mesh with segment_id and/or predicted_label
  std::filesystem::path ground_truth;  // empty: the predicted mesh's own labels
  std::filesystem::path output_dir = "run";
  int rings = 2;
};

RunManifest cmd_eval_overseg(const EvalInputs& inputs, const PipelineConfig& config = {});
RunManifest cmd_eval_semantic(const EvalInputs& inputs, const PipelineConfig& config = {});
RunManifest cmd_upper_bound(const EvalInputs& inputs, const PipelineConfig& config = {});
RunManifest cmd_synth(const SynthParams& params, const std::filesystem::path& output_dir);

}  // namespace pss
