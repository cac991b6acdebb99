#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pss/common.hpp"

namespace pss {

using Face = std::array<std::int32_t, 3>;

/// Scalar types a PLY face property may carry through a load/save cycle.
enum class ScalarType : std::uint8_t { int8, uint8, int16, uint16, int32, uint32, float32, float64 };

/// Per-face property that is not part of the fixed mesh schema
/// (e.g. "segment_id"). Values are stored as double; the declared type is
/// kept so that saving reproduces the original encoding.
struct FaceProperty {
  ScalarType type = ScalarType::int32;
  std::vector<double> values;

  bool operator==(const FaceProperty&) const = default;
};

/// Indexed triangle surface.
///
/// Geometry caches (area, centroid, normal, degenerate flag) are computed
/// eagerly: loaders and every operation that returns a mesh call
/// update_geometry() before handing it out. Code that edits vertices or faces
/// by hand must call it again.
///
/// A face is flagged degenerate when it repeats a vertex index or its area is
/// negligible relative to its longest edge. Degenerate faces keep their index
/// but carry a zero normal and are skipped by normal-dependent computations.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Rgb> face_color;     // empty or one per face
  std::vector<Rgb> vertex_color;   // empty or one per vertex
  std::vector<std::int32_t> face_label;  // empty or one per face; -1 = unlabeled
  std::map<std::string, FaceProperty> face_properties;

  std::vector<double> face_area;
  std::vector<Vec3> face_centroid;
  std::vector<Vec3> face_normal;
  std::vector<std::uint8_t> face_degenerate;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return faces.size(); }
  bool has_face_colors() const { return !face_color.empty(); }
  bool has_vertex_colors() const { return !vertex_color.empty(); }
  bool has_labels() const { return !face_label.empty(); }
  bool has_colors() const { return has_face_colors() || has_vertex_colors(); }

  /// Recomputes the derived per-face caches.
  void update_geometry();

  /// Throws InputError if an index is out of range or an attribute array has
  /// the wrong length.
  void validate() const;

  /// Face color, falling back to the mean of its vertex colors. Returns
  /// {0,0,0} when the mesh carries no color at all.
  Rgb color_of(std::size_t f) const;

  double total_area() const;

  /// Compares content (vertices, faces, colors, labels, extra properties);
  /// derived caches are ignored.
  bool same_content(const TriangleMesh& other) const;
};

/// Axis-aligned bounding box diagonal length; 0 for an empty mesh.
double bounding_box_diagonal(const std::vector<Vec3>& points);

/// Area-weighted per-vertex normals of the non-degenerate faces. Vertices
/// with no such face get a zero vector.
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

/// Content hash over vertices, faces, colors, labels and extra properties.
std::uint64_t content_hash(const TriangleMesh& mesh);

}  // namespace pss
