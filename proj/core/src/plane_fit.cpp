#include "pss/plane_fit.hpp"

#include <Eigen/Eigenvalues>

namespace pss {

Spectrum3 sorted_spectrum(const Eigen::Matrix3d& covariance) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(covariance);
  Spectrum3 s;
  // Eigen returns ascending order.
  for (int k = 0; k < 3; ++k) {
    s.values[k] = std::max(0.0, es.eigenvalues()[2 - k]);
    s.vectors.col(k) = es.eigenvectors().col(2 - k);
  }
  return s;
}

namespace {

PlaneAccumulator::Fit fit_from(const Vec3& centroid, const Eigen::Matrix3d& cov, std::size_t count,
                               const Vec3& orientation, const Plane& fallback) {
  PlaneAccumulator::Fit out;
  if (count < 3) {
    out.plane = fallback;
    out.degenerate = true;
    return out;
  }
  const Spectrum3 s = sorted_spectrum(cov);
  if (!(s.values[1] > 1e-12 * s.values[0]) || s.values[0] <= 0.0) {
    out.plane = fallback;
    out.degenerate = true;
    return out;
  }
  Vec3 n = s.vectors.col(2).normalized();
  if (n.dot(orientation) < 0.0) n = -n;
  out.plane.normal = n;
  out.plane.offset = -n.dot(centroid);
  return out;
}

}  // namespace

void PlaneAccumulator::add(const Vec3& p) {
  if (count_ == 0) origin_ = p;
  const Vec3 d = p - origin_;
  sum_ += d;
  outer_ += d * d.transpose();
  ++count_;
}

Vec3 PlaneAccumulator::centroid() const {
  if (count_ == 0) return Vec3::Zero();
  return origin_ + sum_ / static_cast<double>(count_);
}

Eigen::Matrix3d PlaneAccumulator::covariance() const {
  if (count_ == 0) return Eigen::Matrix3d::Zero();
  const double n = static_cast<double>(count_);
  const Vec3 m = sum_ / n;
  return outer_ / n - m * m.transpose();
}

PlaneAccumulator::Fit PlaneAccumulator::fit(const Plane& fallback) const {
  return fit_from(centroid(), covariance(), count_, orientation_, fallback);
}

PlaneAccumulator::Fit fit_plane_batch(std::span<const Vec3> points, const Vec3& orientation, const Plane& fallback) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  if (!points.empty()) c /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) cov += (p - c) * (p - c).transpose();
  if (!points.empty()) cov /= static_cast<double>(points.size());
  return fit_from(c, cov, points.size(), orientation, fallback);
}

}  // namespace pss
