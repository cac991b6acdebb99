#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pss/mesh.hpp"

namespace pss {

enum class MeshFormat { ply, obj };
enum class PlyEncoding { ascii, binary_little_endian };

/// Loads a PLY (ascii or binary little-endian) or OBJ file. The format is
/// inferred from the extension when not given.
///
/// PLY: vertex x/y/z (any numeric type), optional red/green/blue; face
/// vertex_indices (or vertex_index) list, optional red/green/blue and a
/// signed "label". Other face scalar properties land in
/// TriangleMesh::face_properties; other elements are skipped. Polygons are
/// fan-triangulated, each triangle inheriting the polygon's attributes.
///
/// Errors are reported as ParseError naming the line (ascii) or byte offset
/// (binary) of the problem.
TriangleMesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format = {});

/// Parses PLY content held in memory. `origin` is used in error messages.
TriangleMesh parse_ply(std::string_view content, const std::string& origin = "<memory>");
TriangleMesh parse_obj(std::string_view content, const std::string& origin = "<memory>");

/// Writes a PLY file. Positions are stored as double so a binary round trip
/// is bit-exact; the ascii writer prints 17 significant digits, which is
/// also exact. Optional attributes are written only when present.
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path,
               PlyEncoding encoding = PlyEncoding::binary_little_endian);

std::string serialize_ply(const TriangleMesh& mesh, PlyEncoding encoding);

}  // namespace pss
