#include "pss/metrics.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "pss/feature_table.hpp"

namespace pss {

using json = nlohmann::ordered_json;

namespace {

void check_sizes(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) throw InputError("meshes not co-indexed: per-face arrays differ in length");
}

}  // namespace

double object_purity(std::span<const std::int32_t> segments, std::span<const std::int32_t> gt_components,
                     std::span<const double> face_area) {
  check_sizes(segments.size(), gt_components.size(), face_area.size());
  // Exact rational sums: OP is then exactly 1 for S = G and never drops when a
  // segment is split.
  std::map<std::pair<std::int32_t, std::int32_t>, mpq_class> overlap;
  mpq_class total = 0;
  for (std::size_t f = 0; f < segments.size(); ++f) {
    if (gt_components[f] < 0) continue;
    const mpq_class a(face_area[f]);
    overlap[{segments[f], gt_components[f]}] += a;
    total += a;
  }
  if (!(total > 0)) throw InputError("no labeled ground truth");
  std::map<std::int32_t, mpq_class> best;
  for (const auto& [key, area] : overlap) {
    mpq_class& b = best[key.first];
    if (area > b) b = area;
  }
  mpq_class sum = 0;
  for (const auto& [s, area] : best) sum += area;
  return sum.get_d() / total.get_d();
}

BoundarySet boundary_set(const AdjacencyIndex& adjacency, std::span<const std::int32_t> labels, bool skip_unlabeled) {
  if (labels.size() != adjacency.num_faces()) throw InputError("labeling does not cover every face");
  BoundarySet out;
  const auto& edges = adjacency.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const MeshEdge& me = edges[e];
    if (me.f1 < 0) continue;
    const auto a = labels[me.f0], b = labels[me.f1];
    if (a == b) continue;
    if (skip_unlabeled && (a < 0 || b < 0)) continue;
    out.edges.push_back(static_cast<std::int32_t>(e));
    out.length += me.length;
  }
  return out;
}

BoundarySet match_boundaries(const BoundarySet& from, const BoundarySet& against, const AdjacencyIndex& adjacency,
                             int rings) {
  if (rings < 0) throw InputError("rings must be >= 0");
  const auto& edges = adjacency.edges();
  // Edges of `against` indexed by each endpoint.
  std::vector<std::vector<std::int32_t>> by_vertex(adjacency.num_vertices());
  for (auto e : against.edges) {
    by_vertex[edges[e].v0].push_back(e);
    by_vertex[edges[e].v1].push_back(e);
  }
  BoundarySet out;
  std::vector<std::int32_t> ring;
  for (auto e : from.edges) {
    const MeshEdge& me = edges[e];
    ring = k_ring_vertices(adjacency, me.v0, rings);
    const auto r1 = k_ring_vertices(adjacency, me.v1, rings);
    std::vector<std::int32_t> u;
    std::set_union(ring.begin(), ring.end(), r1.begin(), r1.end(), std::back_inserter(u));
    bool matched = false;
    for (auto v : u) {
      for (auto g : by_vertex[v]) {
        const std::int32_t other = edges[g].v0 == v ? edges[g].v1 : edges[g].v0;
        if (std::binary_search(u.begin(), u.end(), other)) {
          matched = true;
          break;
        }
      }
      if (matched) break;
    }
    if (matched) {
      out.edges.push_back(e);
      out.length += me.length;
    }
  }
  return out;
}

BoundaryScore boundary_precision(const BoundarySet& bs, const BoundarySet& bg, const AdjacencyIndex& adjacency,
                                 int rings) {
  BoundaryScore s;
  s.total_length = bs.length;
  if (bs.edges.empty()) {
    s.value = bg.edges.empty() ? 1.0 : 0.0;
    s.empty_convention = true;
    return s;
  }
  s.matched_length = match_boundaries(bs, bg, adjacency, rings).length;
  s.value = s.matched_length / s.total_length;
  return s;
}

BoundaryScore boundary_recall(const BoundarySet& bs, const BoundarySet& bg, const AdjacencyIndex& adjacency,
                              int rings) {
  BoundaryScore s;
  s.total_length = bg.length;
  if (bg.edges.empty()) {
    s.value = 1.0;
    s.empty_convention = true;
    return s;
  }
  s.matched_length = match_boundaries(bg, bs, adjacency, rings).length;
  s.value = s.matched_length / s.total_length;
  return s;
}

OversegReport evaluate_overseg(const TriangleMesh& mesh, const AdjacencyIndex& adjacency,
                               std::span<const std::int32_t> segments, std::span<const std::int32_t> gt_labels,
                               int rings) {
  check_sizes(segments.size(), gt_labels.size(), mesh.num_faces());
  OversegReport r;
  r.rings = rings;
  const auto comps = face_connected_components(adjacency, gt_labels);
  r.gt_component_count = component_count(comps);
  r.op = object_purity(segments, comps, mesh.face_area);
  const auto bs = boundary_set(adjacency, segments, false);
  const auto bg = boundary_set(adjacency, gt_labels, true);
  r.bp = boundary_precision(bs, bg, adjacency, rings);
  r.br = boundary_recall(bs, bg, adjacency, rings);
  std::int32_t mx = -1;
  for (auto s : segments) mx = std::max(mx, s);
  r.segment_count = static_cast<std::size_t>(mx + 1);
  for (std::size_t f = 0; f < gt_labels.size(); ++f)
    if (gt_labels[f] < 0) r.unlabeled_area += mesh.face_area[f];
  return r;
}

SemanticReport semantic_metrics(std::span<const std::int32_t> predicted, std::span<const std::int32_t> gt,
                                std::span<const double> face_area, std::span<const std::int32_t> classes) {
  check_sizes(predicted.size(), gt.size(), face_area.size());
  SemanticReport r;
  if (!classes.empty()) {
    r.classes.assign(classes.begin(), classes.end());
  } else {
    for (std::size_t f = 0; f < gt.size(); ++f) {
      if (gt[f] < 0) continue;
      r.classes.push_back(gt[f]);
      if (predicted[f] >= 0) r.classes.push_back(predicted[f]);
    }
  }
  std::sort(r.classes.begin(), r.classes.end());
  r.classes.erase(std::unique(r.classes.begin(), r.classes.end()), r.classes.end());
  const std::size_t k = r.classes.size();
  auto index_of = [&](std::int32_t c) -> std::ptrdiff_t {
    const auto it = std::lower_bound(r.classes.begin(), r.classes.end(), c);
    return it != r.classes.end() && *it == c ? it - r.classes.begin() : -1;
  };
  r.confusion.assign(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t f = 0; f < gt.size(); ++f) {
    if (gt[f] < 0) {
      r.unlabeled_area += face_area[f];
      continue;
    }
    const auto gi = index_of(gt[f]);
    if (gi < 0) throw InputError("ground-truth label " + std::to_string(gt[f]) + " is not in the class list");
    const auto pi = index_of(predicted[f]);
    r.confusion[gi][pi < 0 ? k : static_cast<std::size_t>(pi)] += face_area[f];
  }

  double correct = 0.0, acc_sum = 0.0, iou_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t i = 0; i < k; ++i) {
    ClassScore cs;
    cs.label = r.classes[i];
    const double tp = r.confusion[i][i];
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j <= k; ++j) row += r.confusion[i][j];
    for (std::size_t j = 0; j < k; ++j) col += r.confusion[j][i];
    cs.gt_area = row;
    r.labeled_area += row;  // same summation order as `correct`, so OA is exactly 1 when nothing is wrong
    auto ratio = [&](double num, double den) {
      if (den > 0) return num / den;
      cs.undefined = true;
      return 0.0;
    };
    cs.precision = ratio(tp, col);
    cs.recall = ratio(tp, row);
    cs.f1 = ratio(2.0 * cs.precision * cs.recall, cs.precision + cs.recall);
    cs.iou = ratio(tp, row + col - tp);
    correct += tp;
    if (row > 0) {
      ++present;
      acc_sum += cs.recall;
      iou_sum += cs.iou;
    }
    r.per_class.push_back(cs);
  }
  r.oa = r.labeled_area > 0 ? correct / r.labeled_area : 0.0;
  r.macc = present ? acc_sum / static_cast<double>(present) : 0.0;
  r.miou = present ? iou_sum / static_cast<double>(present) : 0.0;
  return r;
}

std::vector<std::int32_t> majority_labels(std::span<const std::int32_t> segments, std::span<const std::int32_t> gt,
                                          std::span<const double> face_area) {
  check_sizes(segments.size(), gt.size(), face_area.size());
  std::int32_t ns = 0;
  for (auto s : segments) ns = std::max(ns, s + 1);
  std::vector<std::map<std::int32_t, double>> votes(static_cast<std::size_t>(ns));
  for (std::size_t f = 0; f < segments.size(); ++f)
    if (gt[f] >= 0) votes[segments[f]][gt[f]] += face_area[f];
  std::vector<std::int32_t> seg_label(votes.size(), -1);
  for (std::size_t s = 0; s < votes.size(); ++s) {
    double best = -1.0;
    for (const auto& [label, area] : votes[s])  // ascending labels: strict > keeps the lower id on ties
      if (area > best) {
        best = area;
        seg_label[s] = label;
      }
  }
  std::vector<std::int32_t> out(segments.size());
  for (std::size_t f = 0; f < segments.size(); ++f) out[f] = seg_label[segments[f]];
  return out;
}

SemanticReport max_achievable(std::span<const std::int32_t> segments, std::span<const std::int32_t> gt,
                              std::span<const double> face_area, std::span<const std::int32_t> classes) {
  const auto pred = majority_labels(segments, gt, face_area);
  return semantic_metrics(pred, gt, face_area, classes);
}

// ---------------------------------------------------------------- reports

namespace {

std::string class_name(const std::vector<std::string>& names, std::int32_t c) {
  if (c >= 0 && static_cast<std::size_t>(c) < names.size() && !names[c].empty()) return names[c];
  return std::to_string(c);
}

json score_json(const BoundaryScore& s) {
  json j = json::object();
  j["value"] = s.value;
  j["matched_length"] = s.matched_length;
  j["total_length"] = s.total_length;
  j["empty_convention"] = s.empty_convention;
  return j;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

json to_json(const OversegReport& r) {
  json j = json::object();
  j["segments"] = r.segment_count;
  j["gt_components"] = r.gt_component_count;
  j["rings"] = r.rings;
  j["op"] = r.op;
  j["bp"] = score_json(r.bp);
  j["br"] = score_json(r.br);
  j["unlabeled_area"] = r.unlabeled_area;
  return j;
}

json to_json(const SemanticReport& r, const std::vector<std::string>& class_names) {
  json j = json::object();
  j["oa"] = r.oa;
  j["macc"] = r.macc;
  j["miou"] = r.miou;
  j["labeled_area"] = r.labeled_area;
  j["unlabeled_area"] = r.unlabeled_area;
  json classes = json::array();
  for (const auto& cs : r.per_class) {
    json c = json::object();
    c["id"] = cs.label;
    c["name"] = class_name(class_names, cs.label);
    c["precision"] = cs.precision;
    c["recall"] = cs.recall;
    c["f1"] = cs.f1;
    c["iou"] = cs.iou;
    c["gt_area"] = cs.gt_area;
    c["undefined"] = cs.undefined;
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);
  j["confusion_columns"] = [&] {
    json cols = json::array();
    for (auto c : r.classes) cols.push_back(class_name(class_names, c));
    cols.push_back("none");
    return cols;
  }();
  j["confusion"] = r.confusion;
  return j;
}

std::string to_text(const OversegReport& r) {
  std::ostringstream out;
  out << "segments       " << r.segment_count << '\n'
      << "gt components  " << r.gt_component_count << '\n'
      << "rings          " << r.rings << '\n'
      << "OP             " << fixed(r.op) << '\n'
      << "BP             " << fixed(r.bp.value) << (r.bp.empty_convention ? "  (empty boundary)" : "") << '\n'
      << "BR             " << fixed(r.br.value) << (r.br.empty_convention ? "  (empty boundary)" : "") << '\n';
  if (r.unlabeled_area > 0) out << "unlabeled area " << fixed(r.unlabeled_area, 2) << " m2 (excluded)\n";
  return out.str();
}

std::string to_text(const SemanticReport& r, const std::vector<std::string>& class_names) {
  std::size_t w = 8;
  for (auto c : r.classes) w = std::max(w, class_name(class_names, c).size() + 2);
  std::ostringstream out;
  auto pad = [&](const std::string& s, std::size_t width) { return s + std::string(width > s.size() ? width - s.size() : 1, ' '); };
  out << pad("class", w) << pad("prec", 9) << pad("recall", 9) << pad("f1", 9) << pad("iou", 9) << "gt_area\n";
  for (const auto& cs : r.per_class)
    out << pad(class_name(class_names, cs.label), w) << pad(fixed(cs.precision), 9) << pad(fixed(cs.recall), 9)
        << pad(fixed(cs.f1), 9) << pad(fixed(cs.iou), 9) << fixed(cs.gt_area, 2) << (cs.undefined ? "  *" : "") << '\n';
  out << "OA " << fixed(r.oa) << "  mAcc " << fixed(r.macc) << "  mIoU " << fixed(r.miou) << '\n';
  if (r.unlabeled_area > 0) out << "unlabeled area " << fixed(r.unlabeled_area, 2) << " m2 (excluded)\n";
  return out.str();
}

std::string overseg_csv_header() { return "segments,op,bp,br"; }

std::string overseg_csv_row(const OversegReport& r) {
  return std::to_string(r.segment_count) + "," + format_number(r.op) + "," + format_number(r.bp.value) + "," +
         format_number(r.br.value);
}

}  // namespace pss
