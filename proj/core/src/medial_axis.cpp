#include "pss/medial_axis.hpp"

#include <cmath>

#include "pss/mesh.hpp"
#include "pss/parallel.hpp"

namespace pss {

std::vector<MedialBall> shrinking_ball_transform(std::span<const Vec3> points, std::span<const Vec3> normals,
                                                 const ShrinkingBallParams& params) {
  KdTree3 index(std::vector<Vec3>(points.begin(), points.end()));
  return shrinking_ball_transform(index, normals, params);
}

std::vector<MedialBall> shrinking_ball_transform(const KdTree3& index, std::span<const Vec3> normals,
                                                 const ShrinkingBallParams& params) {
  const std::size_t n = index.size();
  if (normals.size() != n) throw InputError("point and normal counts differ");
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(normals[i].norm() - 1.0) > 1e-6)
      throw InputError("normal " + std::to_string(i) + " is not unit length");

  const double init = params.init_radius > 0.0 ? params.init_radius : bounding_box_diagonal(index.points());
  const double s = params.side == BallSide::interior ? -1.0 : 1.0;
  const double cos_denoise = std::cos(params.denoise_angle_deg * kPi / 180.0);

  std::vector<MedialBall> balls(n);
  parallel_for(n, params.threads, [&](std::size_t i) {
    const Vec3& p = index.point(i);
    const Vec3 dir = s * normals[i];
    MedialBall ball;
    ball.point = static_cast<std::int32_t>(i);
    ball.side = params.side;
    ball.radius = init;
    ball.center = p + init * dir;

    double r = init;
    Vec3 c = ball.center;
    // Coincident points cannot define a ball through p.
    auto keep = [&](std::int32_t j) {
      return j != static_cast<std::int32_t>(i) && (index.point(j) - p).squaredNorm() > 1e-20;
    };
    for (int it = 0; it < params.max_iterations; ++it) {
      const Neighbor nb = index.nearest_if(c, keep);
      if (nb.index < 0) break;  // isolated point: keep the initial ball, unconverged
      // Empty ball (up to rounding): the current ball is final.
      if (nb.dist2 >= r * r * (1.0 - 1e-12)) {
        ball.converged = ball.valid();
        break;
      }
      const Vec3& q = index.point(nb.index);
      const double denom = 2.0 * (q - p).dot(dir);
      if (!(denom > 0.0)) break;
      const double r_new = (p - q).squaredNorm() / denom;
      const Vec3 c_new = p + r_new * dir;
      const Vec3 a = (p - c_new).normalized();
      const Vec3 b = (q - c_new).normalized();
      if (a.dot(b) > cos_denoise) {  // separation angle below threshold
        ball.denoised = true;
        break;
      }
      const bool settled = std::abs(r_new - r) < params.tolerance * r;
      r = r_new;
      c = c_new;
      ball.radius = r;
      ball.center = c;
      ball.touching = nb.index;
      if (settled) {
        ball.converged = true;
        break;
      }
    }
    balls[i] = ball;
  });
  return balls;
}

}  // namespace pss
