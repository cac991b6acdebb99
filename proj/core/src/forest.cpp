#include "pss/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "pss/common.hpp"
#include "pss/parallel.hpp"

namespace pss {

// ---------------------------------------------------------------- weights

ClassWeights ClassWeights::balanced(std::span<const std::int32_t> labels) {
  std::map<std::int32_t, std::size_t> counts;
  for (auto l : labels) ++counts[l];
  ClassWeights w;
  const double n = static_cast<double>(labels.size());
  for (const auto& [c, k] : counts) {
    w.classes.push_back(c);
    w.weights.push_back(std::sqrt(n / static_cast<double>(k)));
  }
  return w;
}

ClassWeights ClassWeights::uniform(std::span<const std::int32_t> labels) {
  ClassWeights w = balanced(labels);
  std::fill(w.weights.begin(), w.weights.end(), 1.0);
  return w;
}

double ClassWeights::of(std::int32_t cls) const {
  const auto it = std::lower_bound(classes.begin(), classes.end(), cls);
  if (it == classes.end() || *it != cls) return 1.0;
  return weights[static_cast<std::size_t>(it - classes.begin())];
}

// ---------------------------------------------------------------- training

namespace {

struct TrainingData {
  const FeatureTable* x = nullptr;
  std::vector<std::int32_t> y;  // class index
  std::vector<double> w;        // per-sample weight
  std::size_t num_classes = 0;
};

double entropy(std::span<const double> hist, double total) {
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double v : hist)
    if (v > 0.0) {
      const double p = v / total;
      h -= p * std::log(p);
    }
  return h;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingData& data, const ForestParams& params, std::size_t k_features)
      : data_(data), params_(params), k_features_(k_features) {}

  DecisionTree build(std::uint64_t tree_seed) {
    tree_ = DecisionTree{};
    std::vector<std::int32_t> idx(data_.y.size());
    std::iota(idx.begin(), idx.end(), 0);
    tree_.nodes.push_back(TreeNode{});
    grow(0, idx, 0, splitmix64(tree_seed));
    return std::move(tree_);
  }

 private:
  void make_leaf(std::size_t node, std::span<const double> hist, double total) {
    TreeNode& n = tree_.nodes[node];
    n.feature = -1;
    n.leaf = static_cast<std::int32_t>(tree_.leaf_probs.size());
    for (double v : hist) tree_.leaf_probs.push_back(total > 0.0 ? v / total : 1.0 / static_cast<double>(hist.size()));
  }

  void grow(std::size_t node, std::vector<std::int32_t>& idx, int depth, std::uint64_t node_seed) {
    const std::size_t nc = data_.num_classes;
    std::vector<double> hist(nc, 0.0);
    double total = 0.0;
    for (auto i : idx) {
      hist[data_.y[i]] += data_.w[i];
      total += data_.w[i];
    }
    const std::size_t nonzero = static_cast<std::size_t>(std::count_if(hist.begin(), hist.end(), [](double v) { return v > 0.0; }));
    const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf));
    if (nonzero <= 1 || idx.size() < 2 * min_leaf || depth >= params_.max_depth) {
      make_leaf(node, hist, total);
      return;
    }

    Rng rng(node_seed);
    const FeatureTable& x = *data_.x;
    const std::size_t d = x.cols();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    const double parent_h = entropy(hist, total);

    double best_score = -std::numeric_limits<double>::infinity();
    std::int32_t best_feature = -1;
    double best_threshold = 0.0;
    std::vector<double> left(nc), right(nc);
    std::size_t evaluated = 0;
    // Partial Fisher-Yates: draw features until k non-constant ones were tried.
    for (std::size_t j = 0; j < d && evaluated < k_features_; ++j) {
      const std::size_t pick = j + static_cast<std::size_t>(uniform_index(rng, d - j));
      std::swap(features[j], features[pick]);
      const std::size_t f = features[j];
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (auto i : idx) {
        const double v = x.at(i, f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(hi > lo)) continue;
      ++evaluated;
      double thr = lo + uniform01(rng) * (hi - lo);
      if (thr >= hi) thr = lo;
      std::fill(left.begin(), left.end(), 0.0);
      std::fill(right.begin(), right.end(), 0.0);
      double wl = 0.0, wr = 0.0;
      std::size_t nl = 0, nr = 0;
      for (auto i : idx) {
        if (x.at(i, f) <= thr) {
          left[data_.y[i]] += data_.w[i];
          wl += data_.w[i];
          ++nl;
        } else {
          right[data_.y[i]] += data_.w[i];
          wr += data_.w[i];
          ++nr;
        }
      }
      if (nl < min_leaf || nr < min_leaf) continue;
      const double score = parent_h - (wl * entropy(left, wl) + wr * entropy(right, wr)) / total;
      if (score > best_score) {
        best_score = score;
        best_feature = static_cast<std::int32_t>(f);
        best_threshold = thr;
      }
    }
    if (best_feature < 0) {
      make_leaf(node, hist, total);
      return;
    }

    std::vector<std::int32_t> li, ri;
    for (auto i : idx) (x.at(i, best_feature) <= best_threshold ? li : ri).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    const auto l = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    const auto r = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes[node].feature = best_feature;
    tree_.nodes[node].threshold = best_threshold;
    tree_.nodes[node].left = l;
    tree_.nodes[node].right = r;
    grow(static_cast<std::size_t>(l), li, depth + 1, splitmix64(node_seed ^ 0x6a09e667f3bcc908ULL));
    grow(static_cast<std::size_t>(r), ri, depth + 1, splitmix64(node_seed ^ 0xbb67ae8584caa73bULL));
  }

  const TrainingData& data_;
  const ForestParams& params_;
  std::size_t k_features_;
  DecisionTree tree_;
};

}  // namespace

ForestModel train_forest(const FeatureTable& samples, std::span<const std::int32_t> labels,
                         const ForestParams& params, const ClassWeights* weights) {
  if (labels.size() != samples.rows()) throw InputError("label count does not match sample count");
  if (samples.cols() == 0) throw InputError("training samples have no features");
  if (params.trees <= 0) throw InputError("tree count must be > 0");
  if (params.min_leaf <= 0) throw InputError("min_leaf must be > 0");
  if (params.max_depth < 0) throw InputError("max_depth must be >= 0");
  for (std::size_t i = 0; i < samples.rows(); ++i)
    for (double v : samples.row(i))
      if (std::isnan(v)) throw InputError("NaN feature in training sample " + std::to_string(i));

  std::vector<std::int32_t> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw InputError("training set must contain at least two classes");

  TrainingData data;
  data.x = &samples;
  data.num_classes = classes.size();
  data.y.reserve(labels.size());
  data.w.reserve(labels.size());
  for (auto l : labels) {
    data.y.push_back(static_cast<std::int32_t>(std::lower_bound(classes.begin(), classes.end(), l) - classes.begin()));
    data.w.push_back(weights ? weights->of(l) : 1.0);
  }
  const std::size_t d = samples.cols();
  const std::size_t k = params.k_features > 0
                            ? std::min<std::size_t>(static_cast<std::size_t>(params.k_features), d)
                            : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));

  std::vector<DecisionTree> trees(static_cast<std::size_t>(params.trees));
  parallel_for(trees.size(), params.threads, [&](std::size_t t) {
    TreeBuilder builder(data, params, k);
    trees[t] = builder.build(params.seed ^ static_cast<std::uint64_t>(t));
  });
  return ForestModel(std::move(classes), d, samples.layout_version(), params.seed, std::move(trees));
}

// ---------------------------------------------------------------- model

ForestModel::ForestModel(std::vector<std::int32_t> classes, std::size_t num_features, std::uint64_t layout_version,
                         std::uint64_t seed, std::vector<DecisionTree> trees)
    : classes_(std::move(classes)),
      num_features_(num_features),
      layout_version_(layout_version),
      seed_(seed),
      trees_(std::move(trees)) {}

std::span<const double> ForestModel::tree_probabilities(std::size_t t, std::span<const double> x) const {
  const DecisionTree& tree = trees_[t];
  std::int32_t n = 0;
  while (tree.nodes[n].feature >= 0) {
    const TreeNode& node = tree.nodes[n];
    n = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return {tree.leaf_probs.data() + static_cast<std::size_t>(tree.nodes[n].leaf), classes_.size()};
}

ForestPrediction ForestModel::predict(std::span<const double> x, std::uint64_t layout_version) const {
  if (layout_version != layout_version_) throw InputError("feature layout does not match the model");
  if (x.size() != num_features_) throw InputError("feature vector length does not match the model");
  const std::size_t nc = classes_.size();
  ForestPrediction p;
  p.log_mean.assign(nc, 0.0);
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const auto probs = tree_probabilities(t, x);
    for (std::size_t c = 0; c < nc; ++c) p.log_mean[c] += std::log(std::max(probs[c], kProbabilityFloor));
  }
  const double inv = trees_.empty() ? 0.0 : 1.0 / static_cast<double>(trees_.size());
  p.geometric_mean.resize(nc);
  double sum = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    p.log_mean[c] *= inv;
    p.geometric_mean[c] = std::exp(p.log_mean[c]);
    sum += p.geometric_mean[c];
  }
  p.probabilities.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) p.probabilities[c] = p.geometric_mean[c] / sum;
  p.class_index = 0;
  for (std::size_t c = 1; c < nc; ++c)
    if (p.log_mean[c] > p.log_mean[p.class_index]) p.class_index = c;
  p.label = classes_[p.class_index];
  return p;
}

namespace {

class ByteWriter {
 public:
  template <class T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.append(buf, sizeof(T));
  }
  std::string out;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > in_.size())
      throw ParseError("model file truncated at byte offset " + std::to_string(pos_));
    char buf[sizeof(T)];
    std::memcpy(buf, in_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t size() const { return in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

constexpr char kMagic[4] = {'P', 'S', 'S', 'F'};

}  // namespace

std::string ForestModel::serialize() const {
  ByteWriter w;
  w.out.append(kMagic, 4);
  w.put<std::uint32_t>(kFormatVersion);
  w.put<std::uint64_t>(layout_version_);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(num_features_));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(classes_.size()));
  for (auto c : classes_) w.put<std::int32_t>(c);
  w.put<std::uint64_t>(seed_);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(trees_.size()));
  for (const auto& t : trees_) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      w.put<std::int32_t>(n.feature);
      w.put<double>(n.threshold);
      w.put<std::int32_t>(n.left);
      w.put<std::int32_t>(n.right);
      w.put<std::int32_t>(n.leaf);
    }
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.leaf_probs.size()));
    for (double p : t.leaf_probs) w.put<double>(p);
  }
  return std::move(w.out);
}

ForestModel ForestModel::deserialize(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ParseError("not a forest model file (bad magic bytes)");
  ByteReader r(bytes.substr(4));
  const auto version = r.get<std::uint32_t>();
  if (version != kFormatVersion)
    throw ParseError("unsupported forest model version " + std::to_string(version) + " (expected " +
                     std::to_string(kFormatVersion) + ")");
  const auto layout = r.get<std::uint64_t>();
  const auto nfeat = r.get<std::uint32_t>();
  const auto ncls = r.get<std::uint32_t>();
  std::vector<std::int32_t> classes(ncls);
  for (auto& c : classes) c = r.get<std::int32_t>();
  const auto seed = r.get<std::uint64_t>();
  const auto ntrees = r.get<std::uint32_t>();
  std::vector<DecisionTree> trees(ntrees);
  for (auto& t : trees) {
    const auto nn = r.get<std::uint32_t>();
    if (nn == 0 || nn > r.size()) throw ParseError("corrupt forest model: bad node count");
    t.nodes.resize(nn);
    for (auto& n : t.nodes) {
      n.feature = r.get<std::int32_t>();
      n.threshold = r.get<double>();
      n.left = r.get<std::int32_t>();
      n.right = r.get<std::int32_t>();
      n.leaf = r.get<std::int32_t>();
    }
    const auto nl = r.get<std::uint32_t>();
    if (nl > r.size()) throw ParseError("corrupt forest model: bad leaf count");
    t.leaf_probs.resize(nl);
    for (auto& p : t.leaf_probs) p = r.get<double>();
    for (const auto& n : t.nodes) {
      if (n.feature >= 0) {
        if (static_cast<std::uint32_t>(n.feature) >= nfeat || n.left <= 0 || n.right <= 0 ||
            static_cast<std::uint32_t>(n.left) >= nn || static_cast<std::uint32_t>(n.right) >= nn)
          throw ParseError("corrupt forest model: invalid split node");
      } else if (n.leaf < 0 || static_cast<std::size_t>(n.leaf) + ncls > t.leaf_probs.size()) {
        throw ParseError("corrupt forest model: invalid leaf");
      }
    }
  }
  if (r.pos() != r.size()) throw ParseError("corrupt forest model: trailing bytes");
  return ForestModel(std::move(classes), nfeat, layout, seed, std::move(trees));
}

void ForestModel::save(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ForestModel ForestModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

// ---------------------------------------------------------------- application

ProbabilityMap planarity_map(const ForestModel& model, const FeatureTable& face_features, unsigned threads) {
  if (model.classes() != std::vector<std::int32_t>{0, 1})
    throw InputError("planarity model must be binary over classes {0 planar, 1 non-planar}");
  const std::size_t n = face_features.rows();
  ProbabilityMap map;
  map.log_nonplanar.resize(n);
  map.nonplanar.resize(n);
  map.planar.resize(n);
  map.label.resize(n);
  const auto layout = face_features.layout_version();
  parallel_for(n, threads, [&](std::size_t i) {
    const ForestPrediction p = model.predict(face_features.row(i), layout);
    map.log_nonplanar[i] = p.log_mean[1];
    map.nonplanar[i] = std::exp(p.log_mean[1]);
    map.planar[i] = p.geometric_mean[0];
    map.label[i] = static_cast<std::uint8_t>(p.class_index);
  });
  return map;
}

std::vector<SegmentPrediction> classify_segments(const ForestModel& model, const FeatureTable& segment_features,
                                                 unsigned threads) {
  std::vector<SegmentPrediction> out(segment_features.rows());
  const auto layout = segment_features.layout_version();
  parallel_for(out.size(), threads, [&](std::size_t i) {
    ForestPrediction p = model.predict(segment_features.row(i), layout);
    out[i].label = p.label;
    out[i].probabilities = std::move(p.probabilities);
  });
  return out;
}

}  // namespace pss
