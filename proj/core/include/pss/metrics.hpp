#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pss/adjacency.hpp"
#include "pss/mesh.hpp"

namespace pss {

/// OP = sum_k max_g area(s_k & g) / area(G). Faces with gt component < 0
/// are ignored. Throws InputError("no labeled ground truth") when area(G) is 0.
double object_purity(std::span<const std::int32_t> segments, std::span<const std::int32_t> gt_components,
                     std::span<const double> face_area);

/// Mesh edges whose two faces carry different labels. Border edges are never
/// included; with `skip_unlabeled`, edges touching a face labeled < 0 are
/// dropped too.
struct BoundarySet {
  std::vector<std::int32_t> edges;  // indices into AdjacencyIndex::edges(), ascending
  double length = 0.0;
};

BoundarySet boundary_set(const AdjacencyIndex& adjacency, std::span<const std::int32_t> labels,
                         bool skip_unlabeled = false);

/// Edges of `from` matched by `against`: e matches when some edge of
/// `against` has both endpoints in kring(e.v0, rings) U kring(e.v1, rings).
BoundarySet match_boundaries(const BoundarySet& from, const BoundarySet& against, const AdjacencyIndex& adjacency,
                             int rings = 2);

struct BoundaryScore {
  double value = 0.0;
  double matched_length = 0.0;
  double total_length = 0.0;
  bool empty_convention = false;  // value came from an empty-set rule
};

/// BP = |match(B_S vs B_G)| / |B_S|. Both empty: 1; B_S empty only: 0.
BoundaryScore boundary_precision(const BoundarySet& bs, const BoundarySet& bg, const AdjacencyIndex& adjacency,
                                 int rings = 2);
/// BR = |match(B_G vs B_S)| / |B_G|. B_G empty: 1.
BoundaryScore boundary_recall(const BoundarySet& bs, const BoundarySet& bg, const AdjacencyIndex& adjacency,
                              int rings = 2);

struct OversegReport {
  double op = 0.0;
  BoundaryScore bp;
  BoundaryScore br;
  std::size_t segment_count = 0;
  std::size_t gt_component_count = 0;
  int rings = 2;
  double unlabeled_area = 0.0;
};

/// Evaluates a segmentation against ground-truth face labels (-1 unlabeled).
/// Ground-truth components are the edge-connected same-label face sets.
OversegReport evaluate_overseg(const TriangleMesh& mesh, const AdjacencyIndex& adjacency,
                               std::span<const std::int32_t> segments, std::span<const std::int32_t> gt_labels,
                               int rings = 2);

struct ClassScore {
  std::int32_t label = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double iou = 0.0;
  double gt_area = 0.0;
  bool undefined = false;  // some ratio was 0/0 and set to 0
};

struct SemanticReport {
  std::vector<std::int32_t> classes;  // sorted class ids seen in gt or prediction
  /// confusion[i][j]: area with gt classes[i] predicted as classes[j]; the
  /// extra last column holds area predicted as a label outside `classes`
  /// (including -1, no prediction).
  std::vector<std::vector<double>> confusion;
  std::vector<ClassScore> per_class;
  double oa = 0.0;
  double macc = 0.0;  // mean recall over classes present in gt
  double miou = 0.0;  // mean IoU over classes present in gt
  double labeled_area = 0.0;
  double unlabeled_area = 0.0;
};

/// Area-weighted semantic scores over faces with gt >= 0. `classes`, when
/// non-empty, fixes the class list; otherwise it is the union of labels seen.
SemanticReport semantic_metrics(std::span<const std::int32_t> predicted, std::span<const std::int32_t> gt,
                                std::span<const double> face_area, std::span<const std::int32_t> classes = {});

/// Per-face labels: each face gets the area-majority gt label of its segment (ties to the lower
/// id, unlabeled faces do not vote). Segments with no labeled face get -1.
std::vector<std::int32_t> majority_labels(std::span<const std::int32_t> segments, std::span<const std::int32_t> gt,
                                          std::span<const double> face_area);

/// Semantic report of the majority labeling: the best any segment-constant
/// classifier can score on this over-segmentation.
SemanticReport max_achievable(std::span<const std::int32_t> segments, std::span<const std::int32_t> gt,
                              std::span<const double> face_area, std::span<const std::int32_t> classes = {});

nlohmann::ordered_json to_json(const OversegReport& report);
nlohmann::ordered_json to_json(const SemanticReport& report, const std::vector<std::string>& class_names = {});
std::string to_text(const OversegReport& report);
std::string to_text(const SemanticReport& report, const std::vector<std::string>& class_names = {});

/// "segments,op,bp,br" header and row for curve plotting.
std::string overseg_csv_header();
std::string overseg_csv_row(const OversegReport& report);

}  // namespace pss
