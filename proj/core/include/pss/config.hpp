#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pss/face_features.hpp"
#include "pss/forest.hpp"
#include "pss/overseg.hpp"
#include "pss/seggraph.hpp"

namespace pss {

/// Every tunable of a run. JSON keys mirror the field names; unknown keys
/// are rejected. Relative paths in a config file resolve against the file's
/// directory.
struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path output_dir = "run";
  std::filesystem::path planarity_model;  // empty: none
  std::filesystem::path semantic_model;   // empty: none
  std::filesystem::path ground_truth;     // empty: use the input's own labels, if any
  std::vector<std::filesystem::path> training_meshes;

  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: PSSNET_THREADS or hardware concurrency
  double weld_epsilon = 1e-6;

  FaceFeatureParams features;
  ForestParams forest;
  GrowthParams growth;
  GraphParams graph;
  int rings = 2;
  bool write_feature_block = false;

  std::map<std::int32_t, std::string> classes{{0, "terrain"}, {1, "high_vegetation"}, {2, "building"}, {3, "vehicle"}};
  std::vector<std::int32_t> nonplanar_classes{1};

  /// Throws InputError on out-of-range values.
  void validate() const;

  /// Copies seed and thread count into the per-module parameter blocks.
  FaceFeatureParams feature_params() const;
  ForestParams forest_params() const;
  GraphParams graph_params() const;

  std::vector<std::string> class_names() const;  // indexed by id; gaps are ""
  std::vector<std::int32_t> class_ids() const;

  nlohmann::ordered_json to_json() const;
  /// Throws InputError naming the offending key.
  static PipelineConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
};

PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace pss
