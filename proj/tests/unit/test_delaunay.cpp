#include <doctest.h>

#include "delaunay_oracle.hpp"
#include "pss/delaunay.hpp"

using namespace pss;

TEST_CASE("orientation and insphere predicates") {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  CHECK(orient3d_sign(a, b, c, Vec3(0, 0, -1)) > 0);
  CHECK(orient3d_sign(a, b, c, Vec3(0, 0, 1)) < 0);
  CHECK(orient3d_sign(a, b, c, Vec3(0.3, 0.3, 0)) == 0);
  // Nearly coplanar input that a plain double evaluation gets wrong.
  const Vec3 e(0.5, 0.5, 1e-300);
  CHECK(orient3d_sign(a, b, c, e) < 0);
  const Vec3 d(0, 0, -1);
  REQUIRE(orient3d_sign(a, b, c, d) > 0);
  CHECK(insphere_sign(a, b, c, d, Vec3(0.2, 0.2, -0.2)) > 0);
  CHECK(insphere_sign(a, b, c, d, Vec3(5, 5, 5)) < 0);
  CHECK(insphere_sign(a, b, c, d, Vec3(1, 1, 0)) == 0);  // on the sphere through the unit-cube corners
}

TEST_CASE("all_coplanar") {
  std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {3, 7, 0}};
  CHECK(all_coplanar(pts));
  CHECK_THROWS_AS(delaunay_3d(pts), InputError);
  pts.emplace_back(0, 0, 1e-12);
  CHECK_FALSE(all_coplanar(pts));
}

TEST_CASE("delaunay_3d matches the empty-circumsphere brute force") {
  SUBCASE("five-point bipyramid") {
    const std::vector<Vec3> pts{{0, 0, 0}, {2, 0, 0}, {0.7, 1.9, 0.1}, {0.9, 0.6, 1.5}, {0.8, 0.7, -1.4}};
    const auto dt = delaunay_3d(pts);
    std::set<std::array<int, 2>> got;
    for (auto e : dt.edges) got.insert({e[0], e[1]});
    CHECK(got == pss::testing::brute_delaunay_edges(pts));
  }
  SUBCASE("random sets of 5 to 8 points") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Vec3> pts;
      const int n = 5 + static_cast<int>(uniform_index(rng, 4));
      for (int i = 0; i < n; ++i) pts.emplace_back(uniform01(rng), uniform01(rng), uniform01(rng));
      const auto dt = delaunay_3d(pts);
      std::set<std::array<int, 2>> got;
      for (auto e : dt.edges) got.insert({e[0], e[1]});
      CHECK(got == pss::testing::brute_delaunay_edges(pts));
      for (const auto& t : dt.tetrahedra) CHECK(orient3d_sign(pts[t[0]], pts[t[1]], pts[t[2]], pts[t[3]]) > 0);
    }
  }
  SUBCASE("cospherical grid corners are handled") {
    std::vector<Vec3> pts;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) pts.emplace_back(i, j, k);
    const auto dt = delaunay_3d(pts);
    double volume = 0;
    for (const auto& t : dt.tetrahedra)
      volume += (pts[t[0]] - pts[t[3]]).dot((pts[t[1]] - pts[t[3]]).cross(pts[t[2]] - pts[t[3]])) / 6.0;
    CHECK(std::abs(volume) == doctest::Approx(1.0));
  }
}
