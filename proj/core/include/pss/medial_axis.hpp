#pragma once

#include <span>
#include <vector>

#include "pss/common.hpp"
#include "pss/kdtree.hpp"

namespace pss {

enum class BallSide : std::uint8_t { interior, exterior };

/// Maximal empty ball touching surface point `point` (with center offset
/// along the normal) and a second surface point `touching`.
struct MedialBall {
  std::int32_t point = -1;
  std::int32_t touching = -1;  // -1: no accepted touching point
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  BallSide side = BallSide::interior;
  bool converged = false;  // radius update settled or the ball became empty
  bool denoised = false;   // shrinking halted by the separation-angle test

  bool valid() const { return touching >= 0; }
};

struct ShrinkingBallParams {
  BallSide side = BallSide::interior;
  double init_radius = 0.0;  // <= 0: bounding-box diagonal of the points
  double denoise_angle_deg = 30.0;
  int max_iterations = 30;
  double tolerance = 1e-4;   // relative radius change that counts as converged
  unsigned threads = 1;
};

/// Shrinking-ball medial axis transform.
///
/// Normals are outward surface normals. Interior balls are centered at
/// p - r*n, exterior balls at p + r*n. Each iteration finds the point q
/// (other than p and its duplicates) nearest to the current center; if q lies
/// strictly inside the ball the radius becomes |p-q|^2 / (2 (q-p).(s n)),
/// s = -1 interior / +1 exterior, which is the ball through p and q tangent
/// at p. A candidate whose separation angle between p-c and q-c falls below
/// denoise_angle_deg is rejected and the previous accepted ball is kept.
/// Throws InputError on non-unit normals or mismatched sizes.
std::vector<MedialBall> shrinking_ball_transform(std::span<const Vec3> points, std::span<const Vec3> normals,
                                                 const ShrinkingBallParams& params);

/// Overload reusing a k-d tree already built over `points`.
std::vector<MedialBall> shrinking_ball_transform(const KdTree3& index, std::span<const Vec3> normals,
                                                 const ShrinkingBallParams& params);

}  // namespace pss
