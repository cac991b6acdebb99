#include "pss/adjacency.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace pss {

AdjacencyIndex AdjacencyIndex::build(const TriangleMesh& mesh) {
  mesh.validate();
  AdjacencyIndex idx;
  const std::size_t nf = mesh.num_faces();
  const std::size_t nv = mesh.num_vertices();
  idx.face_neighbors_.assign(nf, {-1, -1, -1});
  idx.face_edges_.assign(nf, {-1, -1, -1});

  std::unordered_map<std::uint64_t, std::int32_t> edge_of;
  edge_of.reserve(nf * 2);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& t = mesh.faces[f];
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
    for (int k = 0; k < 3; ++k) {
      std::int32_t a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
      auto [it, inserted] = edge_of.emplace(key, static_cast<std::int32_t>(idx.edges_.size()));
      if (inserted) {
        MeshEdge e;
        e.v0 = a;
        e.v1 = b;
        e.f0 = static_cast<std::int32_t>(f);
        e.length = (mesh.vertices[a] - mesh.vertices[b]).norm();
        idx.edges_.push_back(e);
      } else {
        MeshEdge& e = idx.edges_[it->second];
        if (e.f1 >= 0)
          throw TopologyError("non-manifold edge (" + std::to_string(a) + ", " + std::to_string(b) +
                              ") has more than two incident faces; run repair_nonmanifold first");
        e.f1 = static_cast<std::int32_t>(f);
      }
      idx.face_edges_[f][k] = it->second;
    }
  }
  for (std::size_t f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k) {
      const auto e = idx.face_edges_[f][k];
      if (e < 0) continue;
      const auto& me = idx.edges_[e];
      idx.face_neighbors_[f][k] = me.f0 == static_cast<std::int32_t>(f) ? me.f1 : me.f0;
    }

  // Vertex one-ring in CSR layout, neighbors sorted.
  std::vector<std::size_t> degree(nv, 0);
  for (const auto& e : idx.edges_) {
    ++degree[e.v0];
    ++degree[e.v1];
  }
  idx.ring_offsets_.assign(nv + 1, 0);
  for (std::size_t v = 0; v < nv; ++v) idx.ring_offsets_[v + 1] = idx.ring_offsets_[v] + degree[v];
  idx.ring_.assign(idx.ring_offsets_[nv], -1);
  std::vector<std::size_t> fill(idx.ring_offsets_.begin(), idx.ring_offsets_.end() - 1);
  for (const auto& e : idx.edges_) {
    idx.ring_[fill[e.v0]++] = e.v1;
    idx.ring_[fill[e.v1]++] = e.v0;
  }
  for (std::size_t v = 0; v < nv; ++v)
    std::sort(idx.ring_.begin() + static_cast<std::ptrdiff_t>(idx.ring_offsets_[v]),
              idx.ring_.begin() + static_cast<std::ptrdiff_t>(idx.ring_offsets_[v + 1]));
  return idx;
}

std::vector<std::int32_t> face_connected_components(const AdjacencyIndex& adjacency,
                                                    std::span<const std::int32_t> labels) {
  const std::size_t nf = adjacency.num_faces();
  if (labels.size() != nf) throw InputError("label count does not match face count");
  std::vector<std::int32_t> comp(nf, -1);
  std::int32_t next = 0;
  std::vector<std::int32_t> stack;
  for (std::size_t s = 0; s < nf; ++s) {
    if (labels[s] < 0 || comp[s] >= 0) continue;
    comp[s] = next;
    stack.assign(1, static_cast<std::int32_t>(s));
    while (!stack.empty()) {
      const auto f = stack.back();
      stack.pop_back();
      for (auto g : adjacency.face_neighbors(f)) {
        if (g < 0 || comp[g] >= 0 || labels[g] != labels[s]) continue;
        comp[g] = next;
        stack.push_back(g);
      }
    }
    ++next;
  }
  return comp;
}

std::vector<std::int32_t> k_ring_vertices(const AdjacencyIndex& adjacency, std::int32_t v, int k) {
  if (k < 0) throw InputError("ring count must be >= 0");
  if (v < 0 || static_cast<std::size_t>(v) >= adjacency.num_vertices())
    throw InputError("vertex id out of range");
  std::vector<std::int32_t> out{v};
  std::vector<std::int32_t> frontier{v}, next;
  std::unordered_map<std::int32_t, int> seen{{v, 0}};
  for (int depth = 0; depth < k && !frontier.empty(); ++depth) {
    next.clear();
    for (auto u : frontier)
      for (auto w : adjacency.vertex_neighbors(u))
        if (seen.emplace(w, depth + 1).second) {
          next.push_back(w);
          out.push_back(w);
        }
    frontier.swap(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pss
