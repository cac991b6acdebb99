#include "pss/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pss {

std::vector<SurfaceSample> sample_points(const TriangleMesh& mesh, double density, std::uint64_t seed) {
  if (!(density > 0.0)) throw InputError("sampling density must be > 0");
  const std::size_t nf = mesh.num_faces();
  const double total = mesh.total_area();
  const auto target = static_cast<std::size_t>(std::llround(total * density));
  std::vector<SurfaceSample> out;
  if (target == 0) return out;

  std::vector<std::size_t> count(nf, 0);
  std::vector<double> remainder(nf, 0.0);
  std::size_t assigned = 0;
  for (std::size_t f = 0; f < nf; ++f) {
    const double expect = mesh.face_area[f] * density;
    count[f] = static_cast<std::size_t>(std::floor(expect));
    remainder[f] = expect - static_cast<double>(count[f]);
    assigned += count[f];
  }
  if (assigned < target) {
    std::vector<std::size_t> order(nf);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; i < target - assigned; ++i) ++count[order[i % nf]];
  } else {
    // Floating error can overshoot by a point; trim from the smallest remainders.
    std::vector<std::size_t> order(nf);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] < remainder[b]; });
    std::size_t excess = assigned - target;
    for (std::size_t i = 0; excess > 0 && i < nf; ++i)
      if (count[order[i]] > 0) {
        --count[order[i]];
        --excess;
      }
  }

  const auto vn = vertex_normals(mesh);
  Rng rng(seed);
  out.reserve(target);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& t = mesh.faces[f];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const Rgb col = mesh.color_of(f);
    for (std::size_t i = 0; i < count[f]; ++i) {
      double u = uniform01(rng), v = uniform01(rng);
      if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
      }
      const double w = 1.0 - u - v;
      SurfaceSample s;
      s.position = w * a + u * b + v * c;
      Vec3 n = w * vn[t[0]] + u * vn[t[1]] + v * vn[t[2]];
      const double len = n.norm();
      s.normal = len > 1e-12 ? Vec3(n / len) : mesh.face_normal[f];
      s.color = col;
      s.face = static_cast<std::int32_t>(f);
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace pss
