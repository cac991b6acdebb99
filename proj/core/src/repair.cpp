#include "pss/repair.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_map>

namespace pss {
namespace {

struct UnionFind {
  std::vector<std::int32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::int32_t find(std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Lower index stays root so representatives are the first occurrence.
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(k.x));
    h = splitmix64(h ^ static_cast<std::uint64_t>(k.y));
    return splitmix64(h ^ static_cast<std::uint64_t>(k.z));
  }
};

std::uint64_t edge_key(std::int32_t a, std::int32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

bool collapsed(const Face& f) { return f[0] == f[1] || f[1] == f[2] || f[0] == f[2]; }

std::size_t count_degenerate(const TriangleMesh& m) {
  return static_cast<std::size_t>(std::count(m.face_degenerate.begin(), m.face_degenerate.end(), 1));
}

/// Undirected edge -> incident faces (collapsed faces excluded).
std::unordered_map<std::uint64_t, std::vector<std::int32_t>> edge_faces(const TriangleMesh& m) {
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> map;
  map.reserve(m.num_faces() * 2);
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    const auto& t = m.faces[f];
    if (collapsed(t)) continue;
    for (int k = 0; k < 3; ++k) map[edge_key(t[k], t[(k + 1) % 3])].push_back(static_cast<std::int32_t>(f));
  }
  return map;
}

/// True when face f traverses the directed edge a->b.
bool has_directed(const Face& t, std::int32_t a, std::int32_t b) {
  for (int k = 0; k < 3; ++k)
    if (t[k] == a && t[(k + 1) % 3] == b) return true;
  return false;
}

}  // namespace

RepairResult weld_vertices(const TriangleMesh& mesh, double epsilon) {
  if (!(epsilon >= 0.0)) throw InputError("weld epsilon must be >= 0");
  mesh.validate();
  const std::size_t n = mesh.num_vertices();
  UnionFind uf(n);

  std::unordered_map<CellKey, std::vector<std::int32_t>, CellHash> grid;
  grid.reserve(n);
  auto cell_of = [&](const Vec3& p) {
    if (epsilon == 0.0) {
      // Exact-duplicate mode: key on the bit pattern of the coordinates.
      CellKey k;
      std::memcpy(&k.x, &p.x(), 8);
      std::memcpy(&k.y, &p.y(), 8);
      std::memcpy(&k.z, &p.z(), 8);
      return k;
    }
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / epsilon)),
                   static_cast<std::int64_t>(std::floor(p.y() / epsilon)),
                   static_cast<std::int64_t>(std::floor(p.z() / epsilon))};
  };
  const double eps2 = epsilon * epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = mesh.vertices[i];
    const CellKey c = cell_of(p);
    if (epsilon == 0.0) {
      auto& bucket = grid[c];
      for (auto j : bucket)
        if (mesh.vertices[j] == p) uf.unite(j, static_cast<std::int32_t>(i));
      bucket.push_back(static_cast<std::int32_t>(i));
      continue;
    }
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = grid.find(CellKey{c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (auto j : it->second)
            if ((mesh.vertices[j] - p).squaredNorm() <= eps2) uf.unite(j, static_cast<std::int32_t>(i));
        }
    grid[c].push_back(static_cast<std::int32_t>(i));
  }

  RepairResult out;
  TriangleMesh& m = out.mesh;
  std::vector<std::int32_t> remap(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = uf.find(static_cast<std::int32_t>(i));
    if (remap[r] < 0) {
      remap[r] = static_cast<std::int32_t>(m.vertices.size());
      m.vertices.push_back(mesh.vertices[r]);
      if (mesh.has_vertex_colors()) m.vertex_color.push_back(mesh.vertex_color[r]);
    }
    remap[i] = remap[r];
  }
  m.faces.reserve(mesh.num_faces());
  for (const auto& f : mesh.faces) m.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  m.face_color = mesh.face_color;
  m.face_label = mesh.face_label;
  m.face_properties = mesh.face_properties;
  m.update_geometry();
  out.report.welded_vertices = n - m.num_vertices();
  out.report.degenerate_faces = count_degenerate(m);
  out.report.nonmanifold_edges_after = count_nonmanifold_edges(m);
  out.report.nonmanifold_edges_before = out.report.nonmanifold_edges_after;
  return out;
}

std::size_t count_nonmanifold_edges(const TriangleMesh& mesh) {
  std::size_t c = 0;
  for (const auto& [k, fs] : edge_faces(mesh))
    if (fs.size() > 2) ++c;
  return c;
}

RepairResult repair_nonmanifold(const TriangleMesh& mesh) {
  mesh.validate();
  RepairResult out;
  out.mesh = mesh;
  TriangleMesh& m = out.mesh;
  auto ef = edge_faces(m);

  // Faces cut away from each over-shared edge. The retained pair prefers two
  // faces traversing the edge in opposite directions (consistent winding),
  // lowest face ids first.
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> kept;
  std::size_t nonmanifold = 0;
  for (auto& [key, fs] : ef) {
    if (fs.size() <= 2) continue;
    ++nonmanifold;
    std::sort(fs.begin(), fs.end());
    const auto a = static_cast<std::int32_t>(key >> 32);
    const auto b = static_cast<std::int32_t>(key & 0xffffffffu);
    std::vector<std::int32_t> pair;
    for (std::size_t i = 0; i < fs.size() && pair.empty(); ++i)
      for (std::size_t j = i + 1; j < fs.size(); ++j) {
        const bool fi = has_directed(m.faces[fs[i]], a, b);
        const bool fj = has_directed(m.faces[fs[j]], a, b);
        if (fi != fj) {
          pair = {fs[i], fs[j]};
          break;
        }
      }
    if (pair.empty()) pair = {fs[0], fs[1]};
    kept[key] = pair;
  }
  out.report.nonmanifold_edges_before = nonmanifold;

  // Faces connect around a vertex through an edge only when that edge is
  // manifold, or when both faces form the retained pair of an over-shared edge.
  auto links = [&](std::uint64_t key, std::int32_t f, std::int32_t g) {
    const auto& fs = ef[key];
    if (fs.size() == 2) return true;
    const auto it = kept.find(key);
    if (it == kept.end()) return false;
    const auto& p = it->second;
    return (p[0] == f && p[1] == g) || (p[0] == g && p[1] == f);
  };

  // Vertex -> incident faces.
  const std::size_t nv = m.num_vertices();
  std::vector<std::vector<std::int32_t>> vf(nv);
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    if (collapsed(m.faces[f])) continue;
    for (auto v : m.faces[f]) vf[v].push_back(static_cast<std::int32_t>(f));
  }

  std::size_t split = 0;
  for (std::size_t v = 0; v < nv; ++v) {
    const auto& inc = vf[v];
    if (inc.size() < 2) continue;
    // Union-find over incident faces via linking edges that contain v.
    std::vector<std::int32_t> parent(inc.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::int32_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t i = 0; i < inc.size(); ++i)
      for (std::size_t j = i + 1; j < inc.size(); ++j) {
        const auto& fi = m.faces[inc[i]];
        const auto& fj = m.faces[inc[j]];
        for (auto w : fi) {
          if (w == static_cast<std::int32_t>(v)) continue;
          if (std::find(fj.begin(), fj.end(), w) == fj.end()) continue;
          if (links(edge_key(static_cast<std::int32_t>(v), w), inc[i], inc[j])) {
            const auto ri = find(static_cast<std::int32_t>(i)), rj = find(static_cast<std::int32_t>(j));
            if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
          }
        }
      }
    // The fan containing the lowest face id keeps the original vertex.
    std::unordered_map<std::int32_t, std::int32_t> fan_vertex;
    for (std::size_t i = 0; i < inc.size(); ++i) {
      const auto r = find(static_cast<std::int32_t>(i));
      if (r == 0) continue;
      auto it = fan_vertex.find(r);
      if (it == fan_vertex.end()) {
        it = fan_vertex.emplace(r, static_cast<std::int32_t>(m.vertices.size())).first;
        m.vertices.push_back(m.vertices[v]);
        if (m.has_vertex_colors()) m.vertex_color.push_back(m.vertex_color[v]);
        ++split;
      }
      for (auto& x : m.faces[inc[i]])
        if (x == static_cast<std::int32_t>(v)) x = it->second;
    }
  }

  // A detached face can still reach both endpoints of an over-shared edge
  // through other manifold paths; give such faces private copies.
  for (int pass = 0; pass < 4; ++pass) {
    auto ef2 = edge_faces(m);
    bool changed = false;
    std::vector<std::uint64_t> keys;
    for (const auto& [k, fs] : ef2)
      if (fs.size() > 2) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (auto key : keys) {
      auto fs = ef2[key];
      std::sort(fs.begin(), fs.end());
      const auto a = static_cast<std::int32_t>(key >> 32);
      const auto b = static_cast<std::int32_t>(key & 0xffffffffu);
      for (std::size_t i = 2; i < fs.size(); ++i) {
        auto& t = m.faces[fs[i]];
        for (auto& x : t) {
          if (x == a || x == b) {
            const auto copy = static_cast<std::int32_t>(m.vertices.size());
            m.vertices.push_back(m.vertices[x]);
            if (m.has_vertex_colors()) m.vertex_color.push_back(m.vertex_color[x]);
            x = copy;
            ++split;
          }
        }
        changed = true;
      }
    }
    if (!changed) break;
  }

  m.update_geometry();
  out.report.split_vertices = split;
  out.report.nonmanifold_edges_after = count_nonmanifold_edges(m);
  out.report.degenerate_faces = count_degenerate(m);
  return out;
}

}  // namespace pss
