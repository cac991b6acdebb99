#include "pss/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "pss/adjacency.hpp"
#include "pss/repair.hpp"

namespace pss {

const std::vector<std::string>& synth_class_names() {
  static const std::vector<std::string> names{"terrain", "high_vegetation", "building", "vehicle"};
  return names;
}

void SynthParams::validate() const {
  if (ground_size < 16) throw InputError("ground size must be at least 16 m");
  if (boxes < 0 || trees < 0 || vehicles < 0) throw InputError("object counts must be >= 0");
  if (!(noise >= 0.0 && noise < 0.5)) throw InputError("tree noise must lie in [0, 0.5)");
  if (!(color_jitter >= 0.0)) throw InputError("color jitter must be >= 0");
}

TriangleMesh icosphere(int level, const Vec3& center, double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Face> f{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> mid;
    auto midpoint = [&](std::int32_t a, std::int32_t b) {
      const auto key = std::minmax(a, b);
      const auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto id = static_cast<std::int32_t>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const auto a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f.swap(next);
  }
  TriangleMesh m;
  for (const auto& p : v) m.vertices.push_back(center + radius * p);
  m.faces = std::move(f);
  m.update_geometry();
  return m;
}

std::vector<std::int32_t> planarity_labels(std::span<const std::int32_t> classes,
                                           std::span<const std::int32_t> nonplanar_classes) {
  std::vector<std::int32_t> out(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] < 0) {
      out[i] = -1;
      continue;
    }
    out[i] = std::find(nonplanar_classes.begin(), nonplanar_classes.end(), classes[i]) != nonplanar_classes.end();
  }
  return out;
}

namespace {

struct Builder {
  TriangleMesh mesh;
  Rng& rng;
  double jitter;

  std::int32_t vertex(const Vec3& p) {
    mesh.vertices.push_back(p);
    return static_cast<std::int32_t>(mesh.vertices.size()) - 1;
  }

  void face(std::int32_t a, std::int32_t b, std::int32_t c, std::int32_t label, const Rgb& base) {
    mesh.faces.push_back({a, b, c});
    mesh.face_label.push_back(label);
    Rgb col;
    for (int k = 0; k < 3; ++k)
      col[k] = static_cast<std::uint8_t>(std::clamp(std::lround(base[k] + uniform(rng, -jitter, jitter)), 0L, 255L));
    mesh.face_color.push_back(col);
  }

  /// Quad grid spanning origin + [0,nu]*du + [0,nv]*dv, outward normal du x dv.
  void grid(const Vec3& origin, const Vec3& du, const Vec3& dv, int nu, int nv, std::int32_t label, const Rgb& base) {
    std::vector<std::int32_t> ids((nu + 1) * (nv + 1));
    for (int j = 0; j <= nv; ++j)
      for (int i = 0; i <= nu; ++i) ids[j * (nu + 1) + i] = vertex(origin + i * du + j * dv);
    for (int j = 0; j < nv; ++j)
      for (int i = 0; i < nu; ++i) {
        const auto a = ids[j * (nu + 1) + i], b = ids[j * (nu + 1) + i + 1];
        const auto c = ids[(j + 1) * (nu + 1) + i + 1], d = ids[(j + 1) * (nu + 1) + i];
        face(a, b, c, label, base);
        face(a, c, d, label, base);
      }
  }

  /// Closed-top box on the ground: four walls with `rows` rows and a roof.
  /// Integer footprint [x0, x0+w] x [y0, y0+d]; no floor.
  void box(int x0, int y0, int w, int d, double h, int rows, std::int32_t label, const Rgb& wall, const Rgb& roof) {
    const Vec3 up(0, 0, h / rows);
    const double X0 = x0, Y0 = y0, X1 = x0 + w, Y1 = y0 + d;
    grid({X0, Y0, 0}, {1, 0, 0}, up, w, rows, label, wall);   // south, normal -y
    grid({X1, Y0, 0}, {0, 1, 0}, up, d, rows, label, wall);   // east, +x
    grid({X1, Y1, 0}, {-1, 0, 0}, up, w, rows, label, wall);  // north, +y
    grid({X0, Y1, 0}, {0, -1, 0}, up, d, rows, label, wall);  // west, -x
    grid({X0, Y0, h}, {1, 0, 0}, {0, 1, 0}, w, d, label, roof);
  }
};

struct Footprint {
  int x0, y0, w, d;
  bool overlaps(const Footprint& o, int gap) const {
    return x0 - gap < o.x0 + o.w && o.x0 - gap < x0 + w && y0 - gap < o.y0 + o.d && o.y0 - gap < y0 + d;
  }
  double distance_xy(double x, double y) const {
    const double dx = std::max({x0 - x, 0.0, x - (x0 + w)});
    const double dy = std::max({y0 - y, 0.0, y - (y0 + d)});
    return std::hypot(dx, dy);
  }
};

}  // namespace

SynthTile synth_tile(const SynthParams& params) {
  params.validate();
  Rng rng(splitmix64(params.seed ^ 0x5eed5eed5eedULL));
  const int n = params.ground_size;
  Builder b{TriangleMesh{}, rng, params.color_jitter};
  const Rgb ground_col{118, 104, 84}, wall_col{176, 170, 160}, roof_col{150, 84, 70}, tree_col{52, 128, 46},
      vehicle_col{40, 70, 170};

  std::vector<Footprint> placed;
  auto place = [&](int wmin, int wmax, int dmin, int dmax, int gap, int margin) {
    for (int attempt = 0; attempt < 2000; ++attempt) {
      Footprint fp;
      fp.w = wmin + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(wmax - wmin + 1)));
      fp.d = dmin + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(dmax - dmin + 1)));
      if (fp.w + 2 * margin > n || fp.d + 2 * margin > n) break;
      fp.x0 = margin + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n - 2 * margin - fp.w + 1)));
      fp.y0 = margin + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n - 2 * margin - fp.d + 1)));
      if (std::none_of(placed.begin(), placed.end(), [&](const Footprint& o) { return fp.overlaps(o, gap); })) {
        placed.push_back(fp);
        return fp;
      }
    }
    throw InputError("synthetic tile: objects do not fit on the ground");
  };

  std::vector<std::pair<Footprint, double>> buildings, cars;
  for (int i = 0; i < params.boxes; ++i) {
    const Footprint fp = place(8, 12, 8, 12, 3, 2);
    buildings.push_back({fp, 5.0 + static_cast<double>(uniform_index(rng, 8))});
  }
  for (int i = 0; i < params.vehicles; ++i) {
    Footprint fp = uniform01(rng) < 0.5 ? place(4, 4, 2, 2, 3, 2) : place(2, 2, 4, 4, 3, 2);
    cars.push_back({fp, 1.5});
  }

  // Ground cells not covered by a footprint.
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(n) * n, 0);
  for (const auto& fp : placed)
    for (int y = fp.y0; y < fp.y0 + fp.d; ++y)
      for (int x = fp.x0; x < fp.x0 + fp.w; ++x) covered[static_cast<std::size_t>(y) * n + x] = 1;
  std::vector<std::int32_t> gid(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int y = 0; y <= n; ++y)
    for (int x = 0; x <= n; ++x) gid[static_cast<std::size_t>(y) * (n + 1) + x] = b.vertex(Vec3(x, y, 0));
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      if (covered[static_cast<std::size_t>(y) * n + x]) continue;
      const auto v00 = gid[static_cast<std::size_t>(y) * (n + 1) + x], v10 = gid[static_cast<std::size_t>(y) * (n + 1) + x + 1];
      const auto v11 = gid[static_cast<std::size_t>(y + 1) * (n + 1) + x + 1], v01 = gid[static_cast<std::size_t>(y + 1) * (n + 1) + x];
      // Alternate the diagonal so the ground is not uniformly anisotropic.
      if ((x + y) % 2 == 0) {
        b.face(v00, v10, v11, kTerrain, ground_col);
        b.face(v00, v11, v01, kTerrain, ground_col);
      } else {
        b.face(v00, v10, v01, kTerrain, ground_col);
        b.face(v10, v11, v01, kTerrain, ground_col);
      }
    }
  for (const auto& [fp, h] : buildings)
    b.box(fp.x0, fp.y0, fp.w, fp.d, h, static_cast<int>(h), kBuilding, wall_col, roof_col);
  for (const auto& [fp, h] : cars) b.box(fp.x0, fp.y0, fp.w, fp.d, h, 2, kVehicle, vehicle_col, vehicle_col);

  for (int i = 0; i < params.trees; ++i) {
    const double r = uniform(rng, 2.5, 4.0);
    double cx = 0, cy = 0;
    bool ok = false;
    for (int attempt = 0; attempt < 2000 && !ok; ++attempt) {
      cx = uniform(rng, r + 1.0, n - r - 1.0);
      cy = uniform(rng, r + 1.0, n - r - 1.0);
      ok = std::all_of(placed.begin(), placed.end(), [&](const Footprint& o) { return o.distance_xy(cx, cy) > r + 1.5; });
    }
    if (!ok) throw InputError("synthetic tile: trees do not fit on the ground");
    placed.push_back(Footprint{static_cast<int>(std::floor(cx - r)), static_cast<int>(std::floor(cy - r)),
                               static_cast<int>(std::ceil(2 * r)) + 1, static_cast<int>(std::ceil(2 * r)) + 1});
    const Vec3 center(cx, cy, r * (1.0 + params.noise) + uniform(rng, 1.0, 2.0));
    // Smooth radial noise: a few random plane waves over the unit sphere.
    std::array<Vec3, 3> dir;
    std::array<double, 3> freq, phase;
    for (int k = 0; k < 3; ++k) {
      dir[k] = Vec3(normal01(rng), normal01(rng), normal01(rng)).normalized();
      freq[k] = uniform(rng, 2.0, 5.0);
      phase[k] = uniform(rng, 0.0, 2 * kPi);
    }
    TriangleMesh s = icosphere(3, Vec3::Zero(), 1.0);
    const auto base = static_cast<std::int32_t>(b.mesh.vertices.size());
    for (const auto& u : s.vertices) {
      double noise = 0.0;
      for (int k = 0; k < 3; ++k) noise += std::sin(freq[k] * u.dot(dir[k]) + phase[k]) / 3.0;
      b.vertex(center + r * (1.0 + params.noise * noise) * u);
    }
    for (const auto& f : s.faces) b.face(base + f[0], base + f[1], base + f[2], kHighVegetation, tree_col);
  }

  // Walls share their bottom vertices with the ground grid and each other.
  RepairResult welded = weld_vertices(b.mesh, 0.0);
  SynthTile tile;
  tile.mesh = std::move(welded.mesh);
  const AdjacencyIndex adj = AdjacencyIndex::build(tile.mesh);
  tile.gt_components = component_count(face_connected_components(adj, tile.mesh.face_label));
  return tile;
}

}  // namespace pss
