#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pss/feature_table.hpp"

namespace pss {

struct ForestParams {
  int trees = 100;
  int k_features = 0;  // <= 0: ceil(sqrt(d))
  int min_leaf = 5;
  int max_depth = 40;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Per-class training weights w_c = sqrt(N / n_c), indexed like the sorted
/// class list of the training labels.
struct ClassWeights {
  std::vector<std::int32_t> classes;
  std::vector<double> weights;

  static ClassWeights balanced(std::span<const std::int32_t> labels);
  static ClassWeights uniform(std::span<const std::int32_t> labels);
  double of(std::int32_t cls) const;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1: leaf
  double threshold = 0.0;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t leaf = -1;     // offset into the tree's leaf probability block
};

struct DecisionTree {
  std::vector<TreeNode> nodes;       // nodes[0] is the root
  std::vector<double> leaf_probs;    // num_classes values per leaf
};

/// Aggregated forest output for one feature vector.
struct ForestPrediction {
  /// (1/|T|) sum_t log max(P_t(c), eps), per class.
  std::vector<double> log_mean;
  /// exp(log_mean): per-class geometric mean, not renormalized.
  std::vector<double> geometric_mean;
  /// geometric_mean renormalized to sum to 1.
  std::vector<double> probabilities;
  std::size_t class_index = 0;  // argmax, ties to the lower class id
  std::int32_t label = 0;       // classes()[class_index]
};

/// Probability floor applied before taking logs.
constexpr double kProbabilityFloor = 1e-6;

class ForestModel {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  ForestModel() = default;
  ForestModel(std::vector<std::int32_t> classes, std::size_t num_features, std::uint64_t layout_version,
              std::uint64_t seed, std::vector<DecisionTree> trees);

  const std::vector<std::int32_t>& classes() const { return classes_; }
  std::size_t num_classes() const { return classes_.size(); }
  std::size_t num_features() const { return num_features_; }
  std::uint64_t layout_version() const { return layout_version_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  /// Leaf probability vector reached by x in tree t.
  std::span<const double> tree_probabilities(std::size_t t, std::span<const double> x) const;

  /// Throws InputError if the layout version or vector length differs.
  ForestPrediction predict(std::span<const double> x, std::uint64_t layout_version) const;

  std::string serialize() const;
  static ForestModel deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static ForestModel load(const std::filesystem::path& path);

 private:
  std::vector<std::int32_t> classes_;
  std::size_t num_features_ = 0;
  std::uint64_t layout_version_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<DecisionTree> trees_;
};

/// Extremely randomized trees: every node draws k random non-constant
/// features, one uniform threshold per feature within the node's range, and
/// keeps the candidate with the best class-weighted information gain whose
/// children both hold at least min_leaf samples. No bootstrap. Tree t is
/// grown from seed ^ t and each node from a hash of (tree seed, node path),
/// so results do not depend on the thread count.
///
/// Throws InputError for fewer than two classes, NaN features (naming the
/// sample) or mismatched sizes.
ForestModel train_forest(const FeatureTable& samples, std::span<const std::int32_t> labels,
                         const ForestParams& params, const ClassWeights* weights = nullptr);

/// Per-face planar / non-planar probabilities.
struct ProbabilityMap {
  std::vector<double> log_nonplanar;  // G_i: mean over trees of log P_t(non-planar)
  std::vector<double> nonplanar;      // exp(G_i), in [0, 1]
  std::vector<double> planar;         // geometric mean of P_t(planar)
  std::vector<std::uint8_t> label;    // 0 planar, 1 non-planar (argmax)

  std::size_t size() const { return label.size(); }
};

/// Requires a model over classes {0, 1}.
ProbabilityMap planarity_map(const ForestModel& model, const FeatureTable& face_features, unsigned threads = 1);

struct SegmentPrediction {
  std::int32_t label = -1;
  std::vector<double> probabilities;
};

std::vector<SegmentPrediction> classify_segments(const ForestModel& model, const FeatureTable& segment_features,
                                                 unsigned threads = 1);

}  // namespace pss
