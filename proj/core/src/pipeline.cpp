#include "pss/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "pss/mesh_io.hpp"
#include "pss/segment_features.hpp"

#ifndef PSS_VERSION
#define PSS_VERSION "0.0.0"
#endif

namespace pss {

using ojson = nlohmann::ordered_json;

std::string tool_version() { return PSS_VERSION; }

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for hashing");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return hex64(h);
}

// ---------------------------------------------------------------- manifest

ojson RunManifest::to_json() const {
  ojson j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["input_hash"] = input_hash;
  j["config"] = config;
  ojson st = ojson::array();
  for (const auto& s : stages) st.push_back({{"name", s.name}, {"seconds", s.seconds}});
  j["stages"] = st;
  ojson out = ojson::array();
  for (const auto& o : outputs) out.push_back({{"file", o.file}, {"hash", o.hash}});
  j["outputs"] = out;
  j["notices"] = notices;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& doc) {
  try {
    RunManifest m;
    m.command = doc.at("command").get<std::string>();
    m.tool_version = doc.at("tool_version").get<std::string>();
    m.input_hash = doc.at("input_hash").get<std::string>();
    m.config = doc.at("config");
    for (const auto& s : doc.at("stages")) m.stages.push_back({s.at("name").get<std::string>(), s.at("seconds").get<double>()});
    for (const auto& o : doc.at("outputs")) m.outputs.push_back({o.at("file").get<std::string>(), o.at("hash").get<std::string>()});
    m.notices = doc.at("notices").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("manifest: ") + ex.what());
  }
}

std::vector<std::pair<std::string, std::string>> RunManifest::output_hashes() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& o : outputs) out.emplace_back(o.file, o.hash);
  return out;
}

RunDirectory::RunDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create run directory '" + dir_.string() + "': " + ec.message());
}

void RunDirectory::record(const std::string& name) {
  if (std::find(written_.begin(), written_.end(), name) == written_.end()) written_.push_back(name);
}

void RunDirectory::write_text(const std::string& name, const std::string& content) {
  std::ofstream out(file(name), std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + file(name).string() + "'");
  record(name);
  out << content;
  if (!out) throw IoError("failed writing '" + file(name).string() + "'");
}

void RunDirectory::write_json(const std::string& name, const ojson& doc) { write_text(name, doc.dump(2) + "\n"); }

std::vector<OutputRecord> RunDirectory::outputs() const {
  std::vector<OutputRecord> out;
  for (const auto& n : written_) out.push_back({n, file_hash(file(n))});
  return out;
}

void RunDirectory::mark_partial() {
  for (const auto& n : written_) {
    std::error_code ec;
    if (std::filesystem::exists(file(n), ec)) std::filesystem::rename(file(n), file(n + ".partial"), ec);
  }
}

// ---------------------------------------------------------------- stages

namespace {

[[noreturn]] void rethrow_in_stage(const std::string& name) {
  const std::string prefix = "stage '" + name + "' failed: ";
  auto msg = [&](const std::exception& e) {
    const std::string what = e.what();
    return what.rfind("stage '", 0) == 0 ? what : prefix + what;
  };
  try {
    throw;
  } catch (const ParseError& e) {
    throw ParseError(msg(e));
  } catch (const InputError& e) {
    throw InputError(msg(e));
  } catch (const TopologyError& e) {
    throw TopologyError(msg(e));
  } catch (const IoError& e) {
    throw IoError(msg(e));
  } catch (const std::exception& e) {
    throw Error(msg(e));
  }
}

template <class F>
decltype(auto) run_stage(const std::string& name, const StageHook& hook, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto done = [&] {
    if (hook) hook(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };
  try {
    if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
      f();
      done();
    } else {
      decltype(auto) r = f();
      done();
      return r;
    }
  } catch (...) {
    rethrow_in_stage(name);
  }
}

bool has_labels(std::span<const std::int32_t> labels) {
  return std::any_of(labels.begin(), labels.end(), [](std::int32_t l) { return l >= 0; });
}

std::vector<std::int32_t> report_classes(const PipelineConfig& config, std::span<const std::int32_t> gt) {
  std::vector<std::int32_t> ids = config.class_ids();
  for (auto l : gt)
    if (l >= 0) ids.push_back(l);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

FeatureTable select_rows(const FeatureTable& t, std::span<const std::size_t> rows) {
  FeatureTable out(t.names(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = t.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

double training_accuracy(const ForestModel& model, const LabeledTable& set) {
  if (set.labels.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < set.labels.size(); ++i)
    ok += model.predict(set.features.row(i), set.features.layout_version()).label == set.labels[i];
  return static_cast<double>(ok) / static_cast<double>(set.labels.size());
}

void append_set(LabeledTable& acc, LabeledTable&& part) {
  if (acc.features.cols() == 0 && acc.features.rows() == 0) {
    acc = std::move(part);
    return;
  }
  acc.features.append(part.features);
  acc.labels.insert(acc.labels.end(), part.labels.begin(), part.labels.end());
}

}  // namespace

ojson to_json(const RepairReport& r) {
  ojson j;
  j["welded_vertices"] = r.welded_vertices;
  j["split_vertices"] = r.split_vertices;
  j["nonmanifold_edges_before"] = r.nonmanifold_edges_before;
  j["nonmanifold_edges_after"] = r.nonmanifold_edges_after;
  j["degenerate_faces"] = r.degenerate_faces;
  return j;
}

PreprocessResult preprocess(const TriangleMesh& mesh, double weld_epsilon) {
  RepairResult welded = weld_vertices(mesh, weld_epsilon);
  RepairResult fixed = repair_nonmanifold(welded.mesh);
  PreprocessResult out;
  out.mesh = std::move(fixed.mesh);
  out.report = fixed.report;
  out.report.welded_vertices = welded.report.welded_vertices;
  out.report.nonmanifold_edges_before = welded.report.nonmanifold_edges_before;
  return out;
}

LabeledTable planarity_training_set(const TriangleMesh& mesh, const FeatureTable& face_features,
                                    std::span<const std::int32_t> nonplanar_classes) {
  if (!mesh.has_labels()) throw InputError("training mesh has no face labels");
  const auto labels = planarity_labels(mesh.face_label, nonplanar_classes);
  std::vector<std::size_t> rows;
  LabeledTable set;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f)
    if (labels[f] >= 0 && !mesh.face_degenerate[f]) {
      rows.push_back(f);
      set.labels.push_back(labels[f]);
    }
  set.features = select_rows(face_features, rows);
  return set;
}

LabeledTable semantic_training_set(const TriangleMesh& mesh, const Segmentation& segmentation,
                                   const FeatureTable& segment_features) {
  if (!mesh.has_labels()) throw InputError("training mesh has no face labels");
  const auto face_major = majority_labels(segmentation.face_segment, mesh.face_label, mesh.face_area);
  std::vector<std::int32_t> seg_label(segmentation.size(), -1);
  for (std::size_t f = 0; f < face_major.size(); ++f) seg_label[segmentation.face_segment[f]] = face_major[f];
  std::vector<std::size_t> rows;
  LabeledTable set;
  for (std::size_t s = 0; s < seg_label.size(); ++s)
    if (seg_label[s] >= 0) {
      rows.push_back(s);
      set.labels.push_back(seg_label[s]);
    }
  set.features = select_rows(segment_features, rows);
  return set;
}

Analysis analyze(const TriangleMesh& input, const PipelineConfig& config, const ForestModel& planarity,
                 const ForestModel* semantic, const AnalysisOptions& options, const StageHook& hook) {
  Analysis a;
  const std::vector<std::int32_t> gt = !options.gt_labels.empty() ? options.gt_labels : input.face_label;
  if (!gt.empty() && gt.size() != input.num_faces()) throw InputError("meshes not co-indexed: ground truth has a different face count");

  run_stage("preprocess", hook, [&] {
    auto pre = preprocess(input, config.weld_epsilon);
    a.mesh = std::move(pre.mesh);
    a.repair = pre.report;
  });
  run_stage("face_features", hook, [&] { a.face_features = compute_face_features(a.mesh, config.feature_params()); });
  run_stage("planarity", hook, [&] { a.probmap = planarity_map(planarity, a.face_features, config.threads); });
  AdjacencyIndex adj;
  run_stage("oversegment", hook, [&] {
    adj = AdjacencyIndex::build(a.mesh);
    a.segmentation = oversegment(a.mesh, adj, a.probmap, config.growth);
  });
  run_stage("segment_features", hook, [&] {
    a.segment_features = compute_segment_features(a.mesh, adj, a.segmentation, a.face_features);
  });
  if (options.build_graph)
    run_stage("graph", hook, [&] {
      a.graph = build_segment_graph(a.mesh, adj, a.segmentation, a.segment_features, config.graph_params());
    });
  if (semantic) {
    run_stage("classify", hook, [&] {
      a.predictions = classify_segments(*semantic, a.segment_features, config.threads);
      a.predicted_face_labels.resize(a.mesh.num_faces());
      for (std::size_t f = 0; f < a.mesh.num_faces(); ++f)
        a.predicted_face_labels[f] = a.predictions[a.segmentation.face_segment[f]].label;
    });
  } else {
    a.notices.push_back("no semantic model: prediction stage skipped");
  }
  if (has_labels(gt)) {
    run_stage("evaluate", hook, [&] {
      const auto classes = report_classes(config, gt);
      a.overseg = evaluate_overseg(a.mesh, adj, a.segmentation.face_segment, gt, config.rings);
      a.upper_bound = max_achievable(a.segmentation.face_segment, gt, a.mesh.face_area, classes);
      if (!a.predicted_face_labels.empty())
        a.semantic = semantic_metrics(a.predicted_face_labels, gt, a.mesh.face_area, classes);
    });
  } else {
    a.notices.push_back("no ground-truth labels: metrics stage skipped");
  }
  return a;
}

TrainedModels train_models(std::span<const TriangleMesh> meshes, const PipelineConfig& config, const StageHook& hook) {
  if (meshes.empty()) throw InputError("empty training corpus");
  TrainedModels out;
  std::vector<TriangleMesh> repaired;
  std::vector<FeatureTable> face_tables;
  LabeledTable planar_set;
  run_stage("train_planarity", hook, [&] {
    for (const auto& m : meshes) {
      if (!m.has_labels()) throw InputError("training mesh has no face labels");
      repaired.push_back(preprocess(m, config.weld_epsilon).mesh);
      face_tables.push_back(compute_face_features(repaired.back(), config.feature_params()));
      append_set(planar_set, planarity_training_set(repaired.back(), face_tables.back(), config.nonplanar_classes));
    }
    const auto w = ClassWeights::balanced(planar_set.labels);
    out.planarity = train_forest(planar_set.features, planar_set.labels, config.forest_params(), &w);
    out.planarity_training_accuracy = training_accuracy(out.planarity, planar_set);
  });
  run_stage("train_semantic", hook, [&] {
    LabeledTable sem_set;
    for (std::size_t i = 0; i < repaired.size(); ++i) {
      const auto& m = repaired[i];
      const auto adj = AdjacencyIndex::build(m);
      const auto probmap = planarity_map(out.planarity, face_tables[i], config.threads);
      const auto seg = oversegment(m, adj, probmap, config.growth);
      const auto sf = compute_segment_features(m, adj, seg, face_tables[i]);
      append_set(sem_set, semantic_training_set(m, seg, sf));
    }
    const auto w = ClassWeights::balanced(sem_set.labels);
    out.semantic = train_forest(sem_set.features, sem_set.labels, config.forest_params(), &w);
    out.semantic_training_accuracy = training_accuracy(out.semantic, sem_set);
  });
  return out;
}

// ---------------------------------------------------------------- commands

namespace {

std::string csv_join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s;
}

std::string planarity_csv(const ProbabilityMap& pm) {
  std::ostringstream out;
  out << "face,planar,nonplanar,log_nonplanar,label\n";
  for (std::size_t f = 0; f < pm.size(); ++f)
    out << f << ',' << format_number(pm.planar[f]) << ',' << format_number(pm.nonplanar[f]) << ','
        << format_number(pm.log_nonplanar[f]) << ',' << static_cast<int>(pm.label[f]) << '\n';
  return out.str();
}

std::string predictions_csv(const ForestModel& model, const std::vector<SegmentPrediction>& preds,
                            const std::vector<std::string>& names) {
  auto name_of = [&](std::int32_t c) {
    return c >= 0 && static_cast<std::size_t>(c) < names.size() && !names[c].empty() ? names[c] : std::to_string(c);
  };
  std::vector<std::string> header{"segment", "label", "name"};
  for (auto c : model.classes()) header.push_back("p_" + name_of(c));
  std::ostringstream out;
  out << csv_join(header) << '\n';
  for (std::size_t s = 0; s < preds.size(); ++s) {
    std::vector<std::string> row{std::to_string(s), std::to_string(preds[s].label), name_of(preds[s].label)};
    for (double p : preds[s].probabilities) row.push_back(format_number(p));
    out << csv_join(row) << '\n';
  }
  return out.str();
}

std::string table_csv(const FeatureTable& t) {
  std::ostringstream out;
  t.write_csv(out);
  return out.str();
}

void save_mesh_to(RunDirectory& dir, const std::string& name, const TriangleMesh& mesh) {
  dir.record(name);
  save_mesh(mesh, dir.file(name));
}

void save_model_to(RunDirectory& dir, const std::string& name, const ForestModel& model) {
  dir.record(name);
  model.save(dir.file(name));
}

TriangleMesh load_input(const std::filesystem::path& path, const char* what) {
  if (path.empty()) throw InputError(std::string("no ") + what + " given");
  return load_mesh(path);
}

/// Runs `body` in a run directory, finishing or failing the manifest.
template <class Body>
RunManifest run_command(const std::string& command, const std::filesystem::path& output_dir, ojson config,
                        Body&& body) {
  RunDirectory dir(output_dir);
  RunManifest m;
  m.command = command;
  m.tool_version = tool_version();
  m.config = std::move(config);
  const StageHook hook = [&](const std::string& name, double s) { m.stages.push_back({name, s}); };
  try {
    body(dir, m, hook);
    m.outputs = dir.outputs();
    dir.write_json("manifest.json", m.to_json());
  } catch (...) {
    dir.mark_partial();
    throw;
  }
  return m;
}

void write_overseg(RunDirectory& dir, const OversegReport& r) {
  dir.write_json("overseg_report.json", to_json(r));
  dir.write_text("overseg_report.txt", to_text(r));
  dir.write_text("overseg_curve.csv", overseg_csv_header() + "\n" + overseg_csv_row(r) + "\n");
}

void write_semantic(RunDirectory& dir, const std::string& stem, const SemanticReport& r,
                    const std::vector<std::string>& names) {
  dir.write_json(stem + ".json", to_json(r, names));
  dir.write_text(stem + ".txt", to_text(r, names));
}

void write_graph(RunDirectory& dir, const SegmentGraph& g, bool block) {
  dir.record("graph.json");
  if (block) {
    dir.record("graph_features.bin");
    export_graph(g, dir.file("graph.json"), dir.file("graph_features.bin"));
  } else {
    export_graph(g, dir.file("graph.json"));
  }
}

}  // namespace

RunManifest cmd_preprocess(const PipelineConfig& config) {
  return run_command("preprocess", config.output_dir, config.to_json(), [&](RunDirectory& dir, RunManifest& m, const StageHook& hook) {
    const TriangleMesh input = load_input(config.input, "input mesh");
    m.input_hash = file_hash(config.input);
    const auto pre = run_stage("preprocess", hook, [&] { return preprocess(input, config.weld_epsilon); });
    save_mesh_to(dir, "repaired.ply", pre.mesh);
    dir.write_json("repair_report.json", to_json(pre.report));
  });
}

RunManifest cmd_train(const PipelineConfig& config) {
  return run_command("train", config.output_dir, config.to_json(), [&](RunDirectory& dir, RunManifest& m, const StageHook& hook) {
    if (config.training_meshes.empty()) throw InputError("empty training corpus: no training meshes given");
    std::vector<TriangleMesh> meshes;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& p : config.training_meshes) {
      meshes.push_back(load_mesh(p));
      h = fnv1a(file_hash(p), h);
    }
    m.input_hash = hex64(h);
    const auto models = train_models(meshes, config, hook);
    save_model_to(dir, "planarity.pssf", models.planarity);
    save_model_to(dir, "semantic.pssf", models.semantic);
    ojson rep;
    rep["meshes"] = meshes.size();
    rep["planarity_training_accuracy"] = models.planarity_training_accuracy;
    rep["semantic_training_accuracy"] = models.semantic_training_accuracy;
    rep["semantic_classes"] = models.semantic.classes();
    dir.write_json("training_report.json", rep);
  });
}

RunManifest cmd_segment(const PipelineConfig& config) {
  return run_command("segment", config.output_dir, config.to_json(), [&](RunDirectory& dir, RunManifest& m, const StageHook& hook) {
    const TriangleMesh input = load_input(config.input, "input mesh");
    m.input_hash = file_hash(config.input);
    if (config.planarity_model.empty()) throw InputError("segment needs a planarity model");
    const ForestModel planarity = ForestModel::load(config.planarity_model);
    AnalysisOptions opt;
    opt.build_graph = false;
    if (!config.ground_truth.empty()) opt.gt_labels = load_mesh(config.ground_truth).face_label;
    Analysis a = analyze(input, config, planarity, nullptr, opt, hook);
    m.notices = a.notices;
    TriangleMesh out = a.mesh;
    attach_segmentation(out, a.segmentation);
    save_mesh_to(dir, "segmentation.ply", out);
    dir.write_text("planarity.csv", planarity_csv(a.probmap));
    if (a.overseg) write_overseg(dir, *a.overseg);
  });
}

namespace {

struct SegmentedInput {
  TriangleMesh mesh;
  AdjacencyIndex adjacency;
  Segmentation segmentation;
  FeatureTable face_features;
  FeatureTable segment_features;
};

SegmentedInput load_segmented(const PipelineConfig& config, RunManifest& m, const StageHook& hook) {
  SegmentedInput s;
  s.mesh = load_input(config.input, "segmented mesh");
  m.input_hash = file_hash(config.input);
  run_stage("load_segmentation", hook, [&] {
    s.adjacency = AdjacencyIndex::build(s.mesh);
    s.segmentation = segmentation_from_mesh(s.mesh);
    check_segmentation(s.adjacency, s.segmentation);
  });
  run_stage("face_features", hook, [&] { s.face_features = compute_face_features(s.mesh, config.feature_params()); });
  run_stage("segment_features", hook, [&] {
    s.segment_features = compute_segment_features(s.mesh, s.adjacency, s.segmentation, s.face_features);
  });
  return s;
}

}  // namespace

RunManifest cmd_graph(const PipelineConfig& config) {
  return run_command("graph", config.output_dir, config.to_json(), [&](RunDirectory& dir, RunManifest& m, const StageHook& hook) {
    const auto s = load_segmented(config, m, hook);
    const auto g = run_stage("graph", hook, [&] {
      return build_segment_graph(s.mesh, s.adjacency, s.segmentation, s.segment_features, config.graph_params());
    });
    dir.write_text("segment_features.csv", table_csv(s.segment_features));
    write_graph(dir, g, config.write_feature_block);
  });
}

RunManifest cmd_classify(const PipelineConfig& config) {
  return run_command("classify", config.output_dir, config.to_json(), [&](RunDirectory& dir, RunManifest& m, const StageHook& hook) {
    if (config.semantic_model.empty()) throw InputError("classify needs a semantic model");
    const ForestModel model = ForestModel::load(config.semantic_model);
    const auto s = load_segmented(config, m, hook);
    const auto preds = run_stage("classify", hook, [&] { return classify_segments(model, s.segment_features, config.threads); });
    TriangleMesh out = s.mesh;
    FaceProperty prop{ScalarType::int32, {}};
    for (std::size_t f = 0; f < out.num_faces(); ++f) prop.values.push_back(preds[s.segmentation.face_segment[f]].label);
    out.face_properties["predicted_label"] = std::move(prop);
    dir.write_text("predictions.csv", predictions_csv(model, preds, config.class_names()));
    save_mesh_to(dir, "classified.ply", out);
  });
}

RunManifest cmd_pipeline(const PipelineConfig& config) {
  return run_command("pipeline", config.output_dir, config.to_json(), [&](RunDirectory& dir, RunManifest& m, const StageHook& hook) {
    const TriangleMesh input = load_input(config.input, "input mesh");
    m.input_hash = file_hash(config.input);

    std::optional<ForestModel> planarity, semantic;
    if (!config.planarity_model.empty()) planarity = ForestModel::load(config.planarity_model);
    if (!config.semantic_model.empty()) semantic = ForestModel::load(config.semantic_model);
    if (!planarity || !semantic) {
      std::vector<TriangleMesh> corpus;
      for (const auto& p : config.training_meshes) corpus.push_back(load_mesh(p));
      if (corpus.empty() && !planarity) {
        if (!input.has_labels())
          throw InputError("no planarity model, no training meshes and no labels on the input");
        m.notices.push_back("no planarity model or training meshes: models trained on the input's own labels");
        corpus.push_back(input);
      }
      if (!corpus.empty()) {
        auto trained = train_models(corpus, config, hook);
        if (!planarity) {
          planarity = std::move(trained.planarity);
          save_model_to(dir, "planarity.pssf", *planarity);
        }
        if (!semantic) {
          semantic = std::move(trained.semantic);
          save_model_to(dir, "semantic.pssf", *semantic);
        }
      }
    }

    AnalysisOptions opt;
    if (!config.ground_truth.empty()) opt.gt_labels = load_mesh(config.ground_truth).face_label;
    Analysis a = analyze(input, config, *planarity, semantic ? &*semantic : nullptr, opt, hook);
    m.notices.insert(m.notices.end(), a.notices.begin(), a.notices.end());

    run_stage("write", hook, [&] {
      dir.write_json("repair_report.json", to_json(a.repair));
      dir.write_text("face_features.csv", table_csv(a.face_features));
      dir.write_text("planarity.csv", planarity_csv(a.probmap));
      TriangleMesh seg_mesh = a.mesh;
      attach_segmentation(seg_mesh, a.segmentation);
      if (!a.predicted_face_labels.empty()) {
        FaceProperty prop{ScalarType::int32, {}};
        prop.values.assign(a.predicted_face_labels.begin(), a.predicted_face_labels.end());
        seg_mesh.face_properties["predicted_label"] = std::move(prop);
      }
      save_mesh_to(dir, "segmentation.ply", seg_mesh);
      dir.write_text("segment_features.csv", table_csv(a.segment_features));
      if (a.graph) write_graph(dir, *a.graph, config.write_feature_block);
      if (semantic && !a.predictions.empty())
        dir.write_text("predictions.csv", predictions_csv(*semantic, a.predictions, config.class_names()));
      if (a.overseg) write_overseg(dir, *a.overseg);
      if (a.upper_bound) write_semantic(dir, "upper_bound", *a.upper_bound, config.class_names());
      if (a.semantic) write_semantic(dir, "semantic_report", *a.semantic, config.class_names());
    });
  });
}

namespace {

ojson eval_config(const EvalInputs& in, const PipelineConfig& config) {
  ojson j;
  j["predicted"] = in.predicted.string();
  j["ground_truth"] = in.ground_truth.string();
  j["output_dir"] = in.output_dir.string();
  j["rings"] = in.rings;
  ojson cls = ojson::object();
  for (const auto& [id, name] : config.classes) cls[std::to_string(id)] = name;
  j["classes"] = cls;
  return j;
}

struct EvalMeshes {
  TriangleMesh predicted;
  std::vector<std::int32_t> gt;
};

EvalMeshes load_eval(const EvalInputs& in, RunManifest& m) {
  EvalMeshes e;
  e.predicted = load_input(in.predicted, "predicted mesh");
  std::string h = file_hash(in.predicted);
  if (!in.ground_truth.empty()) {
    const TriangleMesh gt = load_mesh(in.ground_truth);
    if (gt.num_faces() != e.predicted.num_faces())
      throw InputError("meshes not co-indexed: " + std::to_string(e.predicted.num_faces()) + " vs " +
                       std::to_string(gt.num_faces()) + " faces");
    e.gt = gt.face_label;
    h = hex64(fnv1a(file_hash(in.ground_truth), fnv1a(h)));
  } else {
    e.gt = e.predicted.face_label;
  }
  if (!has_labels(e.gt)) throw InputError("ground truth has no face labels");
  m.input_hash = h;
  return e;
}

std::vector<std::int32_t> property_labels(const TriangleMesh& mesh, const std::string& name) {
  const auto it = mesh.face_properties.find(name);
  if (it == mesh.face_properties.end()) return {};
  return {it->second.values.begin(), it->second.values.end()};
}

}  // namespace

RunManifest cmd_eval_overseg(const EvalInputs& in, const PipelineConfig& config) {
  return run_command("eval-overseg", in.output_dir, eval_config(in, config), [&](RunDirectory& dir, RunManifest& m, const StageHook& hook) {
    const auto e = load_eval(in, m);
    const auto seg = property_labels(e.predicted, "segment_id");
    if (seg.empty()) throw InputError("predicted mesh has no 'segment_id' face property");
    const auto r = run_stage("evaluate", hook, [&] {
      const auto adj = AdjacencyIndex::build(e.predicted);
      return evaluate_overseg(e.predicted, adj, seg, e.gt, in.rings);
    });
    write_overseg(dir, r);
  });
}

RunManifest cmd_eval_semantic(const EvalInputs& in, const PipelineConfig& config) {
  return run_command("eval-semantic", in.output_dir, eval_config(in, config), [&](RunDirectory& dir, RunManifest& m, const StageHook& hook) {
    const auto e = load_eval(in, m);
    auto pred = property_labels(e.predicted, "predicted_label");
    if (pred.empty()) pred = e.predicted.face_label;
    if (pred.empty()) throw InputError("predicted mesh has neither 'predicted_label' nor 'label' face values");
    const auto r = run_stage("evaluate", hook, [&] {
      return semantic_metrics(pred, e.gt, e.predicted.face_area, report_classes(config, e.gt));
    });
    write_semantic(dir, "semantic_report", r, config.class_names());
  });
}

RunManifest cmd_upper_bound(const EvalInputs& in, const PipelineConfig& config) {
  return run_command("upper-bound", in.output_dir, eval_config(in, config), [&](RunDirectory& dir, RunManifest& m, const StageHook& hook) {
    const auto e = load_eval(in, m);
    const auto seg = property_labels(e.predicted, "segment_id");
    if (seg.empty()) throw InputError("predicted mesh has no 'segment_id' face property");
    const auto r = run_stage("evaluate", hook, [&] {
      return max_achievable(seg, e.gt, e.predicted.face_area, report_classes(config, e.gt));
    });
    write_semantic(dir, "upper_bound", r, config.class_names());
  });
}

RunManifest cmd_synth(const SynthParams& params, const std::filesystem::path& output_dir) {
  ojson cfg;
  cfg["ground_size"] = params.ground_size;
  cfg["boxes"] = params.boxes;
  cfg["trees"] = params.trees;
  cfg["vehicles"] = params.vehicles;
  cfg["noise"] = params.noise;
  cfg["color_jitter"] = params.color_jitter;
  cfg["seed"] = params.seed;
  return run_command("synth", output_dir, cfg, [&](RunDirectory& dir, RunManifest& m, const StageHook& hook) {
    const auto tile = run_stage("synth", hook, [&] { return synth_tile(params); });
    m.input_hash = hex64(content_hash(tile.mesh));
    save_mesh_to(dir, "synth_tile.ply", tile.mesh);
    ojson rep;
    rep["faces"] = tile.mesh.num_faces();
    rep["vertices"] = tile.mesh.num_vertices();
    rep["gt_components"] = tile.gt_components;
    rep["mesh_hash"] = hex64(content_hash(tile.mesh));
    rep["classes"] = synth_class_names();
    dir.write_json("synth_report.json", rep);
  });
}

}  // namespace pss
