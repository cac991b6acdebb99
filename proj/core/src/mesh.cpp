#include "pss/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>

namespace pss {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void TriangleMesh::update_geometry() {
  const std::size_t n = faces.size();
  face_area.assign(n, 0.0);
  face_centroid.assign(n, Vec3::Zero());
  face_normal.assign(n, Vec3::Zero());
  face_degenerate.assign(n, 0);
  for (std::size_t f = 0; f < n; ++f) {
    const auto& t = faces[f];
    const Vec3& a = vertices[t[0]];
    const Vec3& b = vertices[t[1]];
    const Vec3& c = vertices[t[2]];
    face_centroid[f] = (a + b + c) / 3.0;
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      face_degenerate[f] = 1;
      continue;
    }
    const Vec3 cr = (b - a).cross(c - a);
    const double len = cr.norm();
    face_area[f] = 0.5 * len;
    const double longest = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
    if (!(len > 1e-12 * longest) || len == 0.0) {
      face_degenerate[f] = 1;
      continue;
    }
    face_normal[f] = cr / len;
  }
}

void TriangleMesh::validate() const {
  const auto nv = static_cast<std::int64_t>(vertices.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (auto v : faces[f]) {
      if (v < 0 || v >= nv) {
        throw InputError("face " + std::to_string(f) + ": vertex index " + std::to_string(v) +
                         " out of range (" + std::to_string(nv) + " vertices)");
      }
    }
  }
  if (!face_color.empty() && face_color.size() != faces.size())
    throw InputError("face_color size does not match face count");
  if (!vertex_color.empty() && vertex_color.size() != vertices.size())
    throw InputError("vertex_color size does not match vertex count");
  if (!face_label.empty() && face_label.size() != faces.size())
    throw InputError("face_label size does not match face count");
  for (const auto& [name, prop] : face_properties)
    if (prop.values.size() != faces.size())
      throw InputError("face property '" + name + "' size does not match face count");
}

Rgb TriangleMesh::color_of(std::size_t f) const {
  if (!face_color.empty()) return face_color[f];
  if (vertex_color.empty()) return {0, 0, 0};
  int sum[3] = {0, 0, 0};
  for (auto v : faces[f])
    for (int c = 0; c < 3; ++c) sum[c] += vertex_color[v][c];
  Rgb out;
  for (int c = 0; c < 3; ++c) out[c] = static_cast<std::uint8_t>((sum[c] + 1) / 3);
  return out;
}

double TriangleMesh::total_area() const {
  double s = 0.0;
  for (double a : face_area) s += a;
  return s;
}

bool TriangleMesh::same_content(const TriangleMesh& o) const {
  if (vertices.size() != o.vertices.size()) return false;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i] != o.vertices[i]) return false;
  return faces == o.faces && face_color == o.face_color && vertex_color == o.vertex_color &&
         face_label == o.face_label && face_properties == o.face_properties;
}

double bounding_box_diagonal(const std::vector<Vec3>& points) {
  if (points.empty()) return 0.0;
  Vec3 lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
  std::vector<Vec3> n(mesh.num_vertices(), Vec3::Zero());
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.face_degenerate[f]) continue;
    for (auto v : mesh.faces[f]) n[v] += mesh.face_area[f] * mesh.face_normal[f];
  }
  for (auto& x : n) {
    const double len = x.norm();
    if (len > 0.0) x /= len;
  }
  return n;
}

std::uint64_t content_hash(const TriangleMesh& mesh) {
  std::uint64_t h = fnv1a("pss-mesh");
  for (const auto& v : mesh.vertices) h = fnv1a(v.data(), 3 * sizeof(double), h);
  for (const auto& f : mesh.faces) h = fnv1a(f.data(), sizeof(Face), h);
  for (const auto& c : mesh.face_color) h = fnv1a(c.data(), 3, h);
  for (const auto& c : mesh.vertex_color) h = fnv1a(c.data(), 3, h);
  if (!mesh.face_label.empty())
    h = fnv1a(mesh.face_label.data(), mesh.face_label.size() * sizeof(std::int32_t), h);
  for (const auto& [name, prop] : mesh.face_properties) {
    h = fnv1a(name, h);
    h = fnv1a(prop.values.data(), prop.values.size() * sizeof(double), h);
  }
  return h;
}

}  // namespace pss
