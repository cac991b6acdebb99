#include "pss/config.hpp"

#include <fstream>
#include <set>

namespace pss {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void PipelineConfig::validate() const {
  if (!(weld_epsilon >= 0.0)) throw InputError("weld_epsilon must be >= 0");
  for (double r : features.eigen_radii)
    if (!(r > 0.0)) throw InputError("features.eigen_radii must be > 0");
  for (double r : features.elevation_radii)
    if (!(r > 0.0)) throw InputError("features.elevation_radii must be > 0");
  if (features.eigen_radii.empty()) throw InputError("features.eigen_radii must not be empty");
  if (!(features.density_radius > 0.0)) throw InputError("features.density_radius must be > 0");
  if (!(features.mat_denoise_angle_deg >= 0.0 && features.mat_denoise_angle_deg < 180.0))
    throw InputError("features.mat_denoise_angle_deg must lie in [0, 180)");
  if (forest.trees <= 0) throw InputError("forest.trees must be > 0");
  if (forest.min_leaf <= 0) throw InputError("forest.min_leaf must be > 0");
  if (forest.max_depth <= 0) throw InputError("forest.max_depth must be > 0");
  growth.validate();
  graph.validate();
  if (rings < 0) throw InputError("rings must be >= 0");
  for (const auto& [id, name] : classes) {
    if (id < 0) throw InputError("class ids must be >= 0");
    if (name.empty()) throw InputError("class names must not be empty");
  }
}

FaceFeatureParams PipelineConfig::feature_params() const {
  FaceFeatureParams p = features;
  p.threads = threads;
  return p;
}

ForestParams PipelineConfig::forest_params() const {
  ForestParams p = forest;
  p.seed = seed;
  p.threads = threads;
  return p;
}

GraphParams PipelineConfig::graph_params() const {
  GraphParams p = graph;
  p.seed = seed;
  p.threads = threads;
  return p;
}

std::vector<std::string> PipelineConfig::class_names() const {
  std::vector<std::string> names;
  for (const auto& [id, name] : classes) {
    if (static_cast<std::size_t>(id) >= names.size()) names.resize(static_cast<std::size_t>(id) + 1);
    names[id] = name;
  }
  return names;
}

std::vector<std::int32_t> PipelineConfig::class_ids() const {
  std::vector<std::int32_t> ids;
  for (const auto& [id, name] : classes) ids.push_back(id);
  return ids;
}

ojson PipelineConfig::to_json() const {
  ojson j;
  j["input"] = input.string();
  j["output_dir"] = output_dir.string();
  j["planarity_model"] = planarity_model.string();
  j["semantic_model"] = semantic_model.string();
  j["ground_truth"] = ground_truth.string();
  j["training_meshes"] = ojson::array();
  for (const auto& p : training_meshes) j["training_meshes"].push_back(p.string());
  j["seed"] = seed;
  j["threads"] = threads;
  j["weld_epsilon"] = weld_epsilon;
  j["features"] = {{"eigen_radii", features.eigen_radii},
                   {"elevation_radii", features.elevation_radii},
                   {"density_radius", features.density_radius},
                   {"mat_init_radius", features.mat_init_radius},
                   {"mat_denoise_angle_deg", features.mat_denoise_angle_deg}};
  j["forest"] = {{"trees", forest.trees},
                 {"k_features", forest.k_features},
                 {"min_leaf", forest.min_leaf},
                 {"max_depth", forest.max_depth}};
  j["growth"] = {{"lambda_d", growth.lambda_d},
                 {"lambda_m", growth.lambda_m},
                 {"lambda_g", growth.lambda_g},
                 {"prior", growth.prior == PriorDomain::probability ? "probability" : "log"}};
  j["graph"] = {{"parallel_angle_deg", graph.parallel_angle_deg},
                {"ground_radius_m", graph.ground_radius},
                {"proximity", proximity_mode_name(graph.proximity)},
                {"knn_k", graph.knn_k},
                {"knn_cutoff_factor", graph.knn_cutoff_factor},
                {"sampling_density", graph.exmat_density},
                {"exmat_denoise_angle_deg", graph.exmat_denoise_angle_deg},
                {"log_ratio_epsilon", graph.epsilon}};
  j["rings"] = rings;
  j["write_feature_block"] = write_feature_block;
  ojson cls = ojson::object();
  for (const auto& [id, name] : classes) cls[std::to_string(id)] = name;
  j["classes"] = cls;
  j["nonplanar_classes"] = nonplanar_classes;
  return j;
}

namespace {

/// Walks an object, rejecting keys not consumed by the reader.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw InputError("config: '" + where_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw InputError("config: '" + path(key) + "' has the wrong type");
    }
  }

  void get_path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    get(key, s);
    if (obj_.contains(key)) out = resolve(s, base);
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : obj_.items())
      if (!seen_.count(k)) throw InputError("config: unknown key '" + path(k) + "'");
  }

  static std::filesystem::path resolve(const std::string& s, const std::filesystem::path& base) {
    if (s.empty()) return {};
    std::filesystem::path p(s);
    return p.is_absolute() || base.empty() ? p : base / p;
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& doc, const std::filesystem::path& base) {
  PipelineConfig c;
  ObjectReader r(doc, "");
  r.get_path("input", c.input, base);
  r.get_path("output_dir", c.output_dir, base);
  r.get_path("planarity_model", c.planarity_model, base);
  r.get_path("semantic_model", c.semantic_model, base);
  r.get_path("ground_truth", c.ground_truth, base);
  std::vector<std::string> meshes;
  r.get("training_meshes", meshes);
  for (const auto& m : meshes) c.training_meshes.push_back(ObjectReader::resolve(m, base));
  r.get("seed", c.seed);
  r.get("threads", c.threads);
  r.get("weld_epsilon", c.weld_epsilon);
  r.get("rings", c.rings);
  r.get("write_feature_block", c.write_feature_block);
  r.get("nonplanar_classes", c.nonplanar_classes);

  if (const json* f = r.child("features")) {
    ObjectReader fr(*f, "features");
    fr.get("eigen_radii", c.features.eigen_radii);
    fr.get("elevation_radii", c.features.elevation_radii);
    fr.get("density_radius", c.features.density_radius);
    fr.get("mat_init_radius", c.features.mat_init_radius);
    fr.get("mat_denoise_angle_deg", c.features.mat_denoise_angle_deg);
    fr.finish();
  }
  if (const json* f = r.child("forest")) {
    ObjectReader fr(*f, "forest");
    fr.get("trees", c.forest.trees);
    fr.get("k_features", c.forest.k_features);
    fr.get("min_leaf", c.forest.min_leaf);
    fr.get("max_depth", c.forest.max_depth);
    fr.finish();
  }
  if (const json* g = r.child("growth")) {
    ObjectReader gr(*g, "growth");
    gr.get("lambda_d", c.growth.lambda_d);
    gr.get("lambda_m", c.growth.lambda_m);
    gr.get("lambda_g", c.growth.lambda_g);
    std::string prior = "probability";
    gr.get("prior", prior);
    if (prior == "probability") c.growth.prior = PriorDomain::probability;
    else if (prior == "log") c.growth.prior = PriorDomain::log;
    else throw InputError("config: growth.prior must be 'probability' or 'log'");
    gr.finish();
  }
  if (const json* g = r.child("graph")) {
    ObjectReader gr(*g, "graph");
    gr.get("parallel_angle_deg", c.graph.parallel_angle_deg);
    gr.get("ground_radius_m", c.graph.ground_radius);
    std::string mode = proximity_mode_name(c.graph.proximity);
    gr.get("proximity", mode);
    c.graph.proximity = proximity_mode_from_name(mode);
    gr.get("knn_k", c.graph.knn_k);
    gr.get("knn_cutoff_factor", c.graph.knn_cutoff_factor);
    gr.get("sampling_density", c.graph.exmat_density);
    gr.get("exmat_denoise_angle_deg", c.graph.exmat_denoise_angle_deg);
    gr.get("log_ratio_epsilon", c.graph.epsilon);
    gr.finish();
  }
  if (const json* cls = r.child("classes")) {
    if (!cls->is_object()) throw InputError("config: 'classes' must map id strings to names");
    c.classes.clear();
    for (const auto& [k, v] : cls->items()) {
      std::size_t used = 0;
      int id = -1;
      try {
        id = std::stoi(k, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != k.size() || !v.is_string()) throw InputError("config: classes entry '" + k + "' is invalid");
      c.classes[id] = v.get<std::string>();
    }
  }
  r.finish();
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& ex) {
    throw ParseError("config file '" + path.string() + "': " + ex.what());
  }
  return PipelineConfig::from_json(doc, path.parent_path());
}

}  // namespace pss
