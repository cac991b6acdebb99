#include "pss/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pss {
namespace {

struct PlyProperty {
  std::string name;
  ScalarType type = ScalarType::float32;
  bool is_list = false;
  ScalarType count_type = ScalarType::uint8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::optional<ScalarType> scalar_type_from_name(std::string_view n) {
  if (n == "char" || n == "int8") return ScalarType::int8;
  if (n == "uchar" || n == "uint8") return ScalarType::uint8;
  if (n == "short" || n == "int16") return ScalarType::int16;
  if (n == "ushort" || n == "uint16") return ScalarType::uint16;
  if (n == "int" || n == "int32") return ScalarType::int32;
  if (n == "uint" || n == "uint32") return ScalarType::uint32;
  if (n == "float" || n == "float32") return ScalarType::float32;
  if (n == "double" || n == "float64") return ScalarType::float64;
  return std::nullopt;
}

const char* scalar_type_name(ScalarType t) {
  switch (t) {
    case ScalarType::int8: return "char";
    case ScalarType::uint8: return "uchar";
    case ScalarType::int16: return "short";
    case ScalarType::uint16: return "ushort";
    case ScalarType::int32: return "int";
    case ScalarType::uint32: return "uint";
    case ScalarType::float32: return "float";
    case ScalarType::float64: return "double";
  }
  return "double";
}

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::int8:
    case ScalarType::uint8: return 1;
    case ScalarType::int16:
    case ScalarType::uint16: return 2;
    case ScalarType::int32:
    case ScalarType::uint32:
    case ScalarType::float32: return 4;
    case ScalarType::float64: return 8;
  }
  return 8;
}

template <class T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

template <class T>
void store_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

/// Sequential reader over either the ascii token stream or the binary body.
class PlyBodyReader {
 public:
  PlyBodyReader(std::string_view body, std::size_t body_offset, std::size_t first_line, bool binary,
                const std::string& origin)
      : body_(body), base_(body_offset), line_(first_line), binary_(binary), origin_(origin) {}

  double read(ScalarType t) { return binary_ ? read_binary(t) : read_ascii(); }

  [[noreturn]] void fail(const std::string& what) const {
    if (binary_)
      throw ParseError(origin_ + ": byte offset " + std::to_string(base_ + pos_) + ": " + what);
    throw ParseError(origin_ + ": line " + std::to_string(line_) + ": " + what);
  }

  std::string location() const {
    return binary_ ? "byte offset " + std::to_string(base_ + pos_) : "line " + std::to_string(line_);
  }

  void end_record() {
    if (binary_) return;
    // The ascii format puts one element record per line; tolerate trailing
    // whitespace and require nothing else on the line.
    while (pos_ < body_.size() && (body_[pos_] == ' ' || body_[pos_] == '\t' || body_[pos_] == '\r')) ++pos_;
    if (pos_ < body_.size()) {
      if (body_[pos_] != '\n') fail("unexpected extra values in record");
      ++pos_;
      ++line_;
    }
  }

 private:
  double read_binary(ScalarType t) {
    const std::size_t n = scalar_size(t);
    if (pos_ + n > body_.size()) fail("unexpected end of file (truncated payload)");
    const char* p = body_.data() + pos_;
    pos_ += n;
    switch (t) {
      case ScalarType::int8: return load_le<std::int8_t>(p);
      case ScalarType::uint8: return load_le<std::uint8_t>(p);
      case ScalarType::int16: return load_le<std::int16_t>(p);
      case ScalarType::uint16: return load_le<std::uint16_t>(p);
      case ScalarType::int32: return load_le<std::int32_t>(p);
      case ScalarType::uint32: return load_le<std::uint32_t>(p);
      case ScalarType::float32: return load_le<float>(p);
      case ScalarType::float64: return load_le<double>(p);
    }
    return 0.0;
  }

  double read_ascii() {
    while (pos_ < body_.size() && (body_[pos_] == ' ' || body_[pos_] == '\t' || body_[pos_] == '\r')) ++pos_;
    if (pos_ >= body_.size() || body_[pos_] == '\n') fail("unexpected end of record (truncated payload)");
    std::size_t end = pos_;
    while (end < body_.size() && !std::isspace(static_cast<unsigned char>(body_[end]))) ++end;
    double v = 0.0;
    const auto res = std::from_chars(body_.data() + pos_, body_.data() + end, v);
    if (res.ec != std::errc() || res.ptr != body_.data() + end)
      fail("invalid number '" + std::string(body_.substr(pos_, end - pos_)) + "'");
    pos_ = end;
    return v;
  }

  std::string_view body_;
  std::size_t base_;
  std::size_t pos_ = 0;
  std::size_t line_;
  bool binary_;
  const std::string& origin_;
};

bool is_face_element(const std::string& n) { return n == "face"; }

}  // namespace

TriangleMesh parse_ply(std::string_view content, const std::string& origin) {
  // Header.
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string& line) -> bool {
    if (pos >= content.size()) return false;
    std::size_t e = content.find('\n', pos);
    if (e == std::string_view::npos) e = content.size();
    line.assign(content.substr(pos, e - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = std::min(content.size(), e + 1);
    ++line_no;
    return true;
  };
  auto header_error = [&](const std::string& what) -> ParseError {
    return ParseError(origin + ": line " + std::to_string(line_no) + ": " + what);
  };

  std::string line;
  if (!next_line(line) || line != "ply") throw header_error("missing 'ply' magic");
  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  bool ended = false;
  while (next_line(line)) {
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw.empty() || kw == "comment" || kw == "obj_info") continue;
    if (kw == "format") {
      std::string fmt, ver;
      ss >> fmt >> ver;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else if (fmt == "binary_big_endian") throw header_error("binary_big_endian PLY is not supported");
      else throw header_error("unknown format '" + fmt + "'");
      have_format = true;
    } else if (kw == "element") {
      PlyElement el;
      long long count = -1;
      ss >> el.name >> count;
      if (el.name.empty() || count < 0) throw header_error("malformed element declaration");
      el.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(el));
    } else if (kw == "property") {
      if (elements.empty()) throw header_error("property before any element");
      PlyProperty prop;
      std::string t;
      ss >> t;
      if (t == "list") {
        std::string ct, it;
        ss >> ct >> it >> prop.name;
        auto c = scalar_type_from_name(ct);
        auto i = scalar_type_from_name(it);
        if (!c || !i || prop.name.empty()) throw header_error("malformed list property");
        prop.is_list = true;
        prop.count_type = *c;
        prop.type = *i;
      } else {
        auto st = scalar_type_from_name(t);
        ss >> prop.name;
        if (!st || prop.name.empty()) throw header_error("malformed property '" + line + "'");
        prop.type = *st;
      }
      elements.back().properties.push_back(prop);
    } else if (kw == "end_header") {
      ended = true;
      break;
    } else {
      throw header_error("unknown header keyword '" + kw + "'");
    }
  }
  if (!ended) throw header_error("missing end_header");
  if (!have_format) throw header_error("missing format line");

  TriangleMesh mesh;
  bool has_vcolor = false, has_fcolor = false, has_label = false;
  PlyBodyReader reader(content.substr(pos), pos, line_no + 1, binary, origin);

  for (const auto& el : elements) {
    if (el.name == "vertex") {
      int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
      for (std::size_t k = 0; k < el.properties.size(); ++k) {
        const auto& n = el.properties[k].name;
        if (n == "x") ix = static_cast<int>(k);
        else if (n == "y") iy = static_cast<int>(k);
        else if (n == "z") iz = static_cast<int>(k);
        else if (n == "red") ir = static_cast<int>(k);
        else if (n == "green") ig = static_cast<int>(k);
        else if (n == "blue") ib = static_cast<int>(k);
      }
      if (ix < 0 || iy < 0 || iz < 0) throw ParseError(origin + ": vertex element lacks x/y/z");
      has_vcolor = ir >= 0 && ig >= 0 && ib >= 0;
      mesh.vertices.resize(el.count);
      if (has_vcolor) mesh.vertex_color.resize(el.count);
      std::vector<double> vals(el.properties.size());
      for (std::size_t i = 0; i < el.count; ++i) {
        for (std::size_t k = 0; k < el.properties.size(); ++k) {
          const auto& p = el.properties[k];
          if (p.is_list) {
            const auto cnt = static_cast<long long>(reader.read(p.count_type));
            for (long long j = 0; j < cnt; ++j) reader.read(p.type);
            vals[k] = 0.0;
          } else {
            vals[k] = reader.read(p.type);
          }
        }
        reader.end_record();
        mesh.vertices[i] = Vec3(vals[ix], vals[iy], vals[iz]);
        if (has_vcolor)
          mesh.vertex_color[i] = {static_cast<std::uint8_t>(std::clamp(vals[ir], 0.0, 255.0)),
                                  static_cast<std::uint8_t>(std::clamp(vals[ig], 0.0, 255.0)),
                                  static_cast<std::uint8_t>(std::clamp(vals[ib], 0.0, 255.0))};
      }
    } else if (is_face_element(el.name)) {
      int ilist = -1, ir = -1, ig = -1, ib = -1, il = -1;
      std::vector<int> extra;
      for (std::size_t k = 0; k < el.properties.size(); ++k) {
        const auto& p = el.properties[k];
        const int ki = static_cast<int>(k);
        if (p.is_list) {
          if (p.name == "vertex_indices" || p.name == "vertex_index") ilist = ki;
        } else if (p.name == "red") ir = ki;
        else if (p.name == "green") ig = ki;
        else if (p.name == "blue") ib = ki;
        else if (p.name == "label") il = ki;
        else extra.push_back(ki);
      }
      if (ilist < 0) throw ParseError(origin + ": face element lacks vertex_indices");
      has_fcolor = ir >= 0 && ig >= 0 && ib >= 0;
      has_label = il >= 0;
      for (int k : extra) {
        FaceProperty fp;
        fp.type = el.properties[k].type;
        mesh.face_properties.emplace(el.properties[k].name, std::move(fp));
      }
      std::vector<double> vals(el.properties.size());
      std::vector<std::int64_t> poly;
      for (std::size_t i = 0; i < el.count; ++i) {
        poly.clear();
        const std::string where = reader.location();
        for (std::size_t k = 0; k < el.properties.size(); ++k) {
          const auto& p = el.properties[k];
          if (p.is_list) {
            const double cnt_d = reader.read(p.count_type);
            if (cnt_d < 0) reader.fail("negative list length");
            const auto cnt = static_cast<std::size_t>(cnt_d);
            for (std::size_t j = 0; j < cnt; ++j) {
              const double v = reader.read(p.type);
              if (static_cast<int>(k) == ilist) poly.push_back(static_cast<std::int64_t>(v));
            }
          } else {
            vals[k] = reader.read(p.type);
          }
        }
        reader.end_record();
        if (poly.size() < 3)
          throw ParseError(origin + ": " + where + ": face " + std::to_string(i) + " has fewer than 3 vertices");
        for (auto v : poly) {
          if (v < 0 || v >= static_cast<std::int64_t>(mesh.vertices.size()))
            throw ParseError(origin + ": " + where + ": face " + std::to_string(i) + ": vertex index " +
                             std::to_string(v) + " out of range (" + std::to_string(mesh.vertices.size()) +
                             " vertices): index out of range");
        }
        for (std::size_t j = 1; j + 1 < poly.size(); ++j) {
          mesh.faces.push_back({static_cast<std::int32_t>(poly[0]), static_cast<std::int32_t>(poly[j]),
                                static_cast<std::int32_t>(poly[j + 1])});
          if (has_fcolor)
            mesh.face_color.push_back({static_cast<std::uint8_t>(std::clamp(vals[ir], 0.0, 255.0)),
                                       static_cast<std::uint8_t>(std::clamp(vals[ig], 0.0, 255.0)),
                                       static_cast<std::uint8_t>(std::clamp(vals[ib], 0.0, 255.0))});
          if (has_label) mesh.face_label.push_back(static_cast<std::int32_t>(vals[il]));
          for (int k : extra) mesh.face_properties[el.properties[k].name].values.push_back(vals[k]);
        }
      }
    } else {
      for (std::size_t i = 0; i < el.count; ++i) {
        for (const auto& p : el.properties) {
          if (p.is_list) {
            const auto cnt = static_cast<long long>(reader.read(p.count_type));
            for (long long j = 0; j < cnt; ++j) reader.read(p.type);
          } else {
            reader.read(p.type);
          }
        }
        reader.end_record();
      }
    }
  }
  mesh.update_geometry();
  return mesh;
}

TriangleMesh parse_obj(std::string_view content, const std::string& origin) {
  TriangleMesh mesh;
  std::size_t pos = 0, line_no = 0;
  std::vector<std::int64_t> poly;
  std::vector<Rgb> vcolors;
  bool any_vcolor = false;
  while (pos < content.size()) {
    std::size_t e = content.find('\n', pos);
    if (e == std::string_view::npos) e = content.size();
    std::string line(content.substr(pos, e - pos));
    pos = e + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fail = [&](const std::string& what) {
      throw ParseError(origin + ": line " + std::to_string(line_no) + ": " + what);
    };
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw == "v") {
      double c[6];
      int n = 0;
      while (n < 6 && ss >> c[n]) ++n;
      if (n < 3) fail("vertex needs 3 coordinates");
      mesh.vertices.emplace_back(c[0], c[1], c[2]);
      if (n == 6) {
        any_vcolor = true;
        auto to8 = [](double x) {
          if (x <= 1.0) x *= 255.0;
          return static_cast<std::uint8_t>(std::clamp(std::lround(x), 0L, 255L));
        };
        vcolors.push_back({to8(c[3]), to8(c[4]), to8(c[5])});
      } else {
        vcolors.push_back({0, 0, 0});
      }
    } else if (kw == "f") {
      poly.clear();
      std::string tok;
      while (ss >> tok) {
        const std::string idx = tok.substr(0, tok.find('/'));
        long long v = 0;
        const auto res = std::from_chars(idx.data(), idx.data() + idx.size(), v);
        if (res.ec != std::errc() || v == 0) fail("invalid face index '" + tok + "'");
        const auto nv = static_cast<long long>(mesh.vertices.size());
        const long long zero_based = v > 0 ? v - 1 : nv + v;
        if (zero_based < 0 || zero_based >= nv)
          fail("vertex index " + std::to_string(v) + " out of range (" + std::to_string(nv) +
               " vertices): index out of range");
        poly.push_back(zero_based);
      }
      if (poly.size() < 3) fail("face has fewer than 3 vertices");
      for (std::size_t j = 1; j + 1 < poly.size(); ++j)
        mesh.faces.push_back({static_cast<std::int32_t>(poly[0]), static_cast<std::int32_t>(poly[j]),
                              static_cast<std::int32_t>(poly[j + 1])});
    }
  }
  if (any_vcolor) mesh.vertex_color = std::move(vcolors);
  mesh.update_geometry();
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mesh file '" + path.string() + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!format) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj") format = MeshFormat::obj;
    else if (ext == ".ply") format = MeshFormat::ply;
    else format = content.rfind("ply", 0) == 0 ? MeshFormat::ply : MeshFormat::obj;
  }
  return *format == MeshFormat::ply ? parse_ply(content, path.string()) : parse_obj(content, path.string());
}

namespace {

void append_ascii(std::string& out, ScalarType t, double v) {
  char buf[40];
  if (t == ScalarType::float32 || t == ScalarType::float64) {
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, r.ptr);
  } else {
    const auto r = std::to_chars(buf, buf + sizeof(buf), static_cast<long long>(v));
    out.append(buf, r.ptr);
  }
}

void append_binary(std::string& out, ScalarType t, double v) {
  switch (t) {
    case ScalarType::int8: store_le(out, static_cast<std::int8_t>(v)); break;
    case ScalarType::uint8: store_le(out, static_cast<std::uint8_t>(v)); break;
    case ScalarType::int16: store_le(out, static_cast<std::int16_t>(v)); break;
    case ScalarType::uint16: store_le(out, static_cast<std::uint16_t>(v)); break;
    case ScalarType::int32: store_le(out, static_cast<std::int32_t>(v)); break;
    case ScalarType::uint32: store_le(out, static_cast<std::uint32_t>(v)); break;
    case ScalarType::float32: store_le(out, static_cast<float>(v)); break;
    case ScalarType::float64: store_le(out, v); break;
  }
}

}  // namespace

std::string serialize_ply(const TriangleMesh& mesh, PlyEncoding encoding) {
  mesh.validate();
  const bool binary = encoding == PlyEncoding::binary_little_endian;
  std::string out;
  out += "ply\n";
  out += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
  out += "element vertex " + std::to_string(mesh.num_vertices()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (mesh.has_vertex_colors()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "element face " + std::to_string(mesh.num_faces()) + "\n";
  out += "property list uchar int vertex_indices\n";
  if (mesh.has_face_colors()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (mesh.has_labels()) out += "property int label\n";
  for (const auto& [name, prop] : mesh.face_properties)
    out += std::string("property ") + scalar_type_name(prop.type) + " " + name + "\n";
  out += "end_header\n";

  auto emit = [&](ScalarType t, double v, bool last) {
    if (binary) {
      append_binary(out, t, v);
    } else {
      append_ascii(out, t, v);
      out += last ? '\n' : ' ';
    }
  };

  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const auto& p = mesh.vertices[i];
    const bool c = mesh.has_vertex_colors();
    emit(ScalarType::float64, p.x(), false);
    emit(ScalarType::float64, p.y(), false);
    emit(ScalarType::float64, p.z(), !c);
    if (c)
      for (int k = 0; k < 3; ++k) emit(ScalarType::uint8, mesh.vertex_color[i][k], k == 2);
  }
  const std::size_t n_extra = mesh.face_properties.size();
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const bool more_after_indices = mesh.has_face_colors() || mesh.has_labels() || n_extra > 0;
    emit(ScalarType::uint8, 3, false);
    for (int k = 0; k < 3; ++k) emit(ScalarType::int32, mesh.faces[f][k], k == 2 && !more_after_indices);
    if (mesh.has_face_colors()) {
      const bool more = mesh.has_labels() || n_extra > 0;
      for (int k = 0; k < 3; ++k) emit(ScalarType::uint8, mesh.face_color[f][k], k == 2 && !more);
    }
    if (mesh.has_labels()) emit(ScalarType::int32, mesh.face_label[f], n_extra == 0);
    std::size_t j = 0;
    for (const auto& [name, prop] : mesh.face_properties) {
      ++j;
      emit(prop.type, prop.values[f], j == n_extra);
    }
  }
  return out;
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, PlyEncoding encoding) {
  const std::string data = serialize_ply(mesh, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write mesh file '" + path.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pss
