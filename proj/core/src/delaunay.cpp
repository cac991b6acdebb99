#include "pss/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <gmpxx.h>

#include "pss/mesh.hpp"

namespace pss {

namespace {

constexpr double kEps = 0x1.0p-53;
// Forward error bounds of the plain double evaluation, with headroom.
constexpr double kOrientBound = 2.0 * (7.0 + 56.0 * kEps) * kEps;
constexpr double kInsphereBound = 2.0 * (16.0 + 224.0 * kEps) * kEps;

int sign_of(const mpq_class& v) { return sgn(v); }

int orient3d_exact(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const mpq_class adx = mpq_class(a.x()) - d.x(), ady = mpq_class(a.y()) - d.y(), adz = mpq_class(a.z()) - d.z();
  const mpq_class bdx = mpq_class(b.x()) - d.x(), bdy = mpq_class(b.y()) - d.y(), bdz = mpq_class(b.z()) - d.z();
  const mpq_class cdx = mpq_class(c.x()) - d.x(), cdy = mpq_class(c.y()) - d.y(), cdz = mpq_class(c.z()) - d.z();
  const mpq_class det = adz * (bdx * cdy - cdx * bdy) + bdz * (cdx * ady - adx * cdy) + cdz * (adx * bdy - bdx * ady);
  return sign_of(det);
}

using Q3 = std::array<mpq_class, 3>;

Q3 to_q(const Vec3& v) { return {mpq_class(v.x()), mpq_class(v.y()), mpq_class(v.z())}; }

int orient3d_q(const Q3& a, const Q3& b, const Q3& c, const Q3& d) {
  const mpq_class adx = a[0] - d[0], ady = a[1] - d[1], adz = a[2] - d[2];
  const mpq_class bdx = b[0] - d[0], bdy = b[1] - d[1], bdz = b[2] - d[2];
  const mpq_class cdx = c[0] - d[0], cdy = c[1] - d[1], cdz = c[2] - d[2];
  return sign_of(adz * (bdx * cdy - cdx * bdy) + bdz * (cdx * ady - adx * cdy) + cdz * (adx * bdy - bdx * ady));
}

int insphere_q(const Q3& a, const Q3& b, const Q3& c, const Q3& d, const Q3& e) {
  const mpq_class aex = a[0] - e[0], aey = a[1] - e[1], aez = a[2] - e[2];
  const mpq_class bex = b[0] - e[0], bey = b[1] - e[1], bez = b[2] - e[2];
  const mpq_class cex = c[0] - e[0], cey = c[1] - e[1], cez = c[2] - e[2];
  const mpq_class dex = d[0] - e[0], dey = d[1] - e[1], dez = d[2] - e[2];
  const mpq_class ab = aex * bey - bex * aey, bc = bex * cey - cex * bey, cd = cex * dey - dex * cey;
  const mpq_class da = dex * aey - aex * dey, ac = aex * cey - cex * aey, bd = bex * dey - dex * bey;
  const mpq_class abc = aez * bc - bez * ac + cez * ab;
  const mpq_class bcd = bez * cd - cez * bd + dez * bc;
  const mpq_class cda = cez * da + dez * ac + aez * cd;
  const mpq_class dab = dez * ab + aez * bd + bez * da;
  const mpq_class alift = aex * aex + aey * aey + aez * aez;
  const mpq_class blift = bex * bex + bey * bey + bez * bez;
  const mpq_class clift = cex * cex + cey * cey + cez * cez;
  const mpq_class dlift = dex * dex + dey * dey + dez * dez;
  return sign_of((dlift * abc - clift * dab) + (blift * cda - alift * bcd));
}

/// Point p coplanar with triangle abc: inside its circumcircle? The sphere
/// through a, b, c and a point off their plane cuts the plane in exactly
/// that circle.
bool in_circumcircle_coplanar(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
  const Q3 qa = to_q(a), qb = to_q(b), qc = to_q(c), qp = to_q(p);
  const mpq_class ux = qb[0] - qa[0], uy = qb[1] - qa[1], uz = qb[2] - qa[2];
  const mpq_class vx = qc[0] - qa[0], vy = qc[1] - qa[1], vz = qc[2] - qa[2];
  const Q3 qd{qa[0] + (uy * vz - uz * vy), qa[1] + (uz * vx - ux * vz), qa[2] + (ux * vy - uy * vx)};
  const int o = orient3d_q(qa, qb, qc, qd);
  if (o == 0) return false;  // collinear triangle
  return o * insphere_q(qa, qb, qc, qd, qp) > 0;
}

}  // namespace

int orient3d_sign(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y(), adz = a.z() - d.z();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y(), bdz = b.z() - d.z();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y(), cdz = c.z() - d.z();
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * std::abs(adz) +
                           (std::abs(cdxady) + std::abs(adxcdy)) * std::abs(bdz) +
                           (std::abs(adxbdy) + std::abs(bdxady)) * std::abs(cdz);
  const double bound = kOrientBound * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return orient3d_exact(a, b, c, d);
}

int insphere_sign(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  const double aex = a.x() - e.x(), aey = a.y() - e.y(), aez = a.z() - e.z();
  const double bex = b.x() - e.x(), bey = b.y() - e.y(), bez = b.z() - e.z();
  const double cex = c.x() - e.x(), cey = c.y() - e.y(), cez = c.z() - e.z();
  const double dex = d.x() - e.x(), dey = d.y() - e.y(), dez = d.z() - e.z();
  const double aexbey = aex * bey, bexaey = bex * aey, bexcey = bex * cey, cexbey = cex * bey;
  const double cexdey = cex * dey, dexcey = dex * cey, dexaey = dex * aey, aexdey = aex * dey;
  const double aexcey = aex * cey, cexaey = cex * aey, bexdey = bex * dey, dexbey = dex * bey;
  const double ab = aexbey - bexaey, bc = bexcey - cexbey, cd = cexdey - dexcey;
  const double da = dexaey - aexdey, ac = aexcey - cexaey, bd = bexdey - dexbey;
  const double abc = aez * bc - bez * ac + cez * ab;
  const double bcd = bez * cd - cez * bd + dez * bc;
  const double cda = cez * da + dez * ac + aez * cd;
  const double dab = dez * ab + aez * bd + bez * da;
  const double alift = aex * aex + aey * aey + aez * aez;
  const double blift = bex * bex + bey * bey + bez * bez;
  const double clift = cex * cex + cey * cey + cez * cez;
  const double dlift = dex * dex + dey * dey + dez * dez;
  const double det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);

  const double aezp = std::abs(aez), bezp = std::abs(bez), cezp = std::abs(cez), dezp = std::abs(dez);
  const double abp = std::abs(aexbey) + std::abs(bexaey), bcp = std::abs(bexcey) + std::abs(cexbey);
  const double cdp = std::abs(cexdey) + std::abs(dexcey), dap = std::abs(dexaey) + std::abs(aexdey);
  const double acp = std::abs(aexcey) + std::abs(cexaey), bdp = std::abs(bexdey) + std::abs(dexbey);
  const double permanent = (cdp * bezp + bdp * cezp + bcp * dezp) * alift +
                           (dap * cezp + acp * dezp + cdp * aezp) * blift +
                           (abp * dezp + bdp * aezp + dap * bezp) * clift +
                           (bcp * aezp + acp * bezp + abp * cezp) * dlift;
  const double bound = kInsphereBound * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return insphere_q(to_q(a), to_q(b), to_q(c), to_q(d), to_q(e));
}

namespace {

/// Indices (a, b, c, d) of four non-coplanar points, or d == -1.
std::array<std::int32_t, 4> find_simplex(std::span<const Vec3> p) {
  std::array<std::int32_t, 4> s{-1, -1, -1, -1};
  const auto n = static_cast<std::int32_t>(p.size());
  if (n < 4) return s;
  s[0] = 0;
  for (std::int32_t i = 1; i < n && s[1] < 0; ++i)
    if (p[i] != p[0]) s[1] = i;
  if (s[1] < 0) return s;
  const Q3 a = to_q(p[s[0]]), b = to_q(p[s[1]]);
  const mpq_class ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
  for (std::int32_t i = 1; i < n && s[2] < 0; ++i) {
    const Q3 c = to_q(p[i]);
    const mpq_class vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
    if (uy * vz - uz * vy != 0 || uz * vx - ux * vz != 0 || ux * vy - uy * vx != 0) s[2] = i;
  }
  if (s[2] < 0) return s;
  for (std::int32_t i = 1; i < n && s[3] < 0; ++i)
    if (orient3d_sign(p[s[0]], p[s[1]], p[s[2]], p[i]) != 0) s[3] = i;
  return s;
}

class Triangulator {
 public:
  static constexpr std::int32_t kInf = -1;

  explicit Triangulator(std::span<const Vec3> points) : p_(points) {}

  void run(const std::array<std::int32_t, 4>& simplex, std::span<const std::int32_t> order);
  Delaunay3 result() const;

 private:
  struct Cell {
    std::array<std::int32_t, 4> v;
    std::array<std::int32_t, 4> n;  // neighbor opposite v[k]
    bool alive = true;
  };

  static bool is_ghost(const Cell& c) { return c.v[0] == kInf || c.v[1] == kInf || c.v[2] == kInf || c.v[3] == kInf; }

  /// orient of the cell with vertex k replaced by point q.
  int orient_replaced(const Cell& c, int k, const Vec3& q) const {
    std::array<const Vec3*, 4> pts;
    for (int j = 0; j < 4; ++j) pts[j] = j == k ? &q : &p_[c.v[j]];
    return orient3d_sign(*pts[0], *pts[1], *pts[2], *pts[3]);
  }

  bool in_conflict(const Cell& c, const Vec3& q) const {
    for (int k = 0; k < 4; ++k) {
      if (c.v[k] != kInf) continue;
      const int o = orient_replaced(c, k, q);
      if (o != 0) return o > 0;
      std::array<std::int32_t, 3> f;
      int m = 0;
      for (int j = 0; j < 4; ++j)
        if (j != k) f[m++] = c.v[j];
      return in_circumcircle_coplanar(p_[f[0]], p_[f[1]], p_[f[2]], q);
    }
    return insphere_sign(p_[c.v[0]], p_[c.v[1]], p_[c.v[2]], p_[c.v[3]], q) > 0;
  }

  std::int32_t locate(const Vec3& q, std::int32_t start);
  std::int32_t new_cell(const std::array<std::int32_t, 4>& v);
  void insert(std::int32_t pi, std::int32_t start_cell);

  std::span<const Vec3> p_;
  std::vector<Cell> cells_;
  std::vector<std::int32_t> free_;
  std::int32_t last_ = 0;
  std::uint64_t walk_state_ = 0x2545f4914f6cdd1dULL;
};

std::int32_t Triangulator::new_cell(const std::array<std::int32_t, 4>& v) {
  Cell c{v, {-1, -1, -1, -1}, true};
  if (!free_.empty()) {
    const auto id = free_.back();
    free_.pop_back();
    cells_[id] = c;
    return id;
  }
  cells_.push_back(c);
  return static_cast<std::int32_t>(cells_.size()) - 1;
}

std::int32_t Triangulator::locate(const Vec3& q, std::int32_t start) {
  std::int32_t cur = start;
  const std::size_t max_steps = 4 * cells_.size() + 16;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const Cell& c = cells_[cur];
    if (is_ghost(c)) {
      if (in_conflict(c, q)) return cur;
      break;
    }
    walk_state_ = splitmix64(walk_state_);
    const int first = static_cast<int>(walk_state_ & 3);
    std::int32_t next = -1;
    for (int t = 0; t < 4 && next < 0; ++t) {
      const int k = (first + t) & 3;
      if (orient_replaced(c, k, q) < 0) next = c.n[k];
    }
    if (next < 0) return cur;  // q inside or on the cell
    cur = next;
  }
  // Walk failed (should not happen on a Delaunay triangulation); scan.
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (cells_[i].alive && in_conflict(cells_[i], q)) return static_cast<std::int32_t>(i);
  return -1;
}

void Triangulator::insert(std::int32_t pi, std::int32_t start_cell) {
  const Vec3& q = p_[pi];
  const std::int32_t seed = locate(q, start_cell);
  if (seed < 0) return;
  {
    const Cell& c = cells_[seed];
    for (auto v : c.v)
      if (v != kInf && p_[v] == q) return;  // duplicate point
    if (!in_conflict(c, q)) return;
  }

  std::vector<std::int32_t> cavity{seed};
  std::vector<std::uint8_t> mark(cells_.size(), 0);
  mark[seed] = 1;
  struct Boundary {
    std::int32_t cell, k, outside;
  };
  std::vector<Boundary> boundary;
  for (std::size_t h = 0; h < cavity.size(); ++h) {
    const std::int32_t ci = cavity[h];
    for (int k = 0; k < 4; ++k) {
      const std::int32_t nb = cells_[ci].n[k];
      if (mark[nb] == 1) continue;
      if (mark[nb] == 0 && in_conflict(cells_[nb], q)) {
        mark[nb] = 1;
        cavity.push_back(nb);
      } else {
        mark[nb] = 2;
        boundary.push_back({ci, k, nb});
      }
    }
  }
  std::unordered_map<std::uint64_t, std::pair<std::int32_t, int>> open_faces;
  open_faces.reserve(boundary.size() * 3);
  std::vector<std::array<std::int32_t, 4>> verts;
  verts.reserve(boundary.size());
  for (const auto& b : boundary) {
    std::array<std::int32_t, 4> v = cells_[b.cell].v;
    v[b.k] = pi;
    verts.push_back(v);
  }
  std::vector<std::pair<std::int32_t, Boundary>> created;
  created.reserve(boundary.size());
  for (const auto& b : boundary) created.push_back({-1, b});
  for (std::size_t t = 0; t < created.size(); ++t) {
    auto& [id, b] = created[t];
    id = new_cell(verts[t]);
    Cell& c = cells_[id];
    c.n[b.k] = b.outside;
    Cell& out = cells_[b.outside];
    for (int j = 0; j < 4; ++j)
      if (out.n[j] == b.cell) out.n[j] = id;
    for (int j = 0; j < 4; ++j) {
      if (j == b.k) continue;
      // Face opposite j holds q and the two vertices other than j and k.
      std::int32_t e[2];
      int m = 0;
      for (int r = 0; r < 4; ++r)
        if (r != j && r != b.k) e[m++] = c.v[r];
      const auto lo = static_cast<std::uint32_t>(std::min(e[0], e[1]) + 1);
      const auto hi = static_cast<std::uint32_t>(std::max(e[0], e[1]) + 1);
      const std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | hi;
      auto it = open_faces.find(key);
      if (it == open_faces.end()) {
        open_faces.emplace(key, std::make_pair(id, j));
      } else {
        c.n[j] = it->second.first;
        cells_[it->second.first].n[it->second.second] = id;
        open_faces.erase(it);
      }
    }
  }
  // Released only now, so new cells never take an id that outside cells
  // still reference.
  for (auto ci : cavity) {
    cells_[ci].alive = false;
    free_.push_back(ci);
  }
  last_ = created.empty() ? last_ : created.back().first;
}

void Triangulator::run(const std::array<std::int32_t, 4>& s, std::span<const std::int32_t> order) {
  std::array<std::int32_t, 4> v = s;
  if (orient3d_sign(p_[v[0]], p_[v[1]], p_[v[2]], p_[v[3]]) < 0) std::swap(v[0], v[1]);
  const std::int32_t t0 = new_cell(v);
  // Ghost cell k closes the hull face opposite v[k] with the infinite vertex.
  std::array<std::int32_t, 4> ghosts;
  for (int k = 0; k < 4; ++k) {
    std::array<std::int32_t, 4> g = v;
    g[k] = kInf;
    ghosts[k] = new_cell(g);
    cells_[t0].n[k] = ghosts[k];
    cells_[ghosts[k]].n[k] = t0;
  }
  // Ghost k's face opposite v[j] borders ghost j.
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      if (j != k) cells_[ghosts[k]].n[j] = ghosts[j];
  // The ghost with kInf at position k has the same vertex order as the
  // positive inner cell, so an outside point in slot k is negative; swap two
  // finite slots to make ghost orientation positive for outside points.
  for (int k = 0; k < 4; ++k) {
    Cell& g = cells_[ghosts[k]];
    int a = -1, b = -1;
    for (int j = 0; j < 4; ++j)
      if (j != k) (a < 0 ? a : b) = j;
    std::swap(g.v[a], g.v[b]);
    std::swap(g.n[a], g.n[b]);
  }
  last_ = t0;
  for (auto i : order) {
    if (i == s[0] || i == s[1] || i == s[2] || i == s[3]) continue;
    std::int32_t start = last_;
    if (start < 0 || start >= static_cast<std::int32_t>(cells_.size()) || !cells_[start].alive) start = t0;
    insert(i, start);
  }
}

Delaunay3 Triangulator::result() const {
  Delaunay3 out;
  for (const auto& c : cells_)
    if (c.alive && !is_ghost(c)) out.tetrahedra.push_back(c.v);
  for (const auto& t : out.tetrahedra)
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) out.edges.push_back({std::min(t[a], t[b]), std::max(t[a], t[b])});
  std::sort(out.edges.begin(), out.edges.end());
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  std::sort(out.tetrahedra.begin(), out.tetrahedra.end());
  return out;
}

std::uint64_t morton_key(const Vec3& p, const Vec3& lo, double scale) {
  std::uint64_t key = 0;
  std::array<std::uint32_t, 3> q;
  for (int k = 0; k < 3; ++k)
    q[k] = static_cast<std::uint32_t>(std::clamp((p[k] - lo[k]) * scale, 0.0, 2097151.0));
  for (int bit = 20; bit >= 0; --bit)
    for (int k = 0; k < 3; ++k) key = (key << 1) | ((q[k] >> bit) & 1u);
  return key;
}

}  // namespace

bool all_coplanar(std::span<const Vec3> points) { return find_simplex(points)[3] < 0; }

Delaunay3 delaunay_3d(std::span<const Vec3> points, const DelaunayParams& params) {
  if (all_coplanar(points)) throw InputError("Delaunay triangulation needs four non-coplanar points");
  const std::vector<Vec3> original(points.begin(), points.end());
  std::vector<Vec3> p = original;
  const double diag = bounding_box_diagonal(original);
  if (params.perturbation > 0 && diag > 0) {
    const double amp = params.perturbation * diag;
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::uint64_t h = splitmix64(params.seed ^ splitmix64(i));
      for (int k = 0; k < 3; ++k) {
        h = splitmix64(h);
        p[i][k] += amp * (static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5);
      }
    }
  }
  auto simplex = find_simplex(p);
  if (simplex[3] < 0) throw InputError("Delaunay triangulation needs four non-coplanar points");

  Vec3 lo = p[0], hi = p[0];
  for (const auto& q : p) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const double extent = std::max((hi - lo).maxCoeff(), 1e-300);
  const double scale = 2097151.0 / extent;
  std::vector<std::pair<std::uint64_t, std::int32_t>> keyed(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) keyed[i] = {morton_key(p[i], lo, scale), static_cast<std::int32_t>(i)};
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::int32_t> order(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) order[i] = keyed[i].second;

  Triangulator tri(p);
  tri.run(simplex, order);
  return tri.result();
}

}  // namespace pss
