#pragma once

#include <span>

#include <Eigen/Core>

#include "pss/common.hpp"

namespace pss {

/// Oriented plane {x : normal.x + offset = 0}.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  double signed_distance(const Vec3& x) const { return normal.dot(x) + offset; }
  double distance(const Vec3& x) const { return std::abs(signed_distance(x)); }
};

/// Eigen decomposition of a 3x3 covariance, eigenvalues descending.
struct Spectrum3 {
  Eigen::Vector3d values;   // l1 >= l2 >= l3 >= 0
  Eigen::Matrix3d vectors;  // column k pairs with values[k]
};

Spectrum3 sorted_spectrum(const Eigen::Matrix3d& covariance);

/// Running first and second moments of a point set, accumulated about the
/// first point added so large coordinates do not cancel. Fitting yields the
/// total-least-squares plane: it passes through the centroid with the
/// least-variance eigenvector as normal.
class PlaneAccumulator {
 public:
  void add(const Vec3& p);
  /// Area-weighted face normal used only to orient the fitted normal.
  void add_orientation(const Vec3& weighted_normal) { orientation_ += weighted_normal; }

  std::size_t count() const { return count_; }
  Vec3 centroid() const;
  Eigen::Matrix3d covariance() const;  // population covariance
  const Vec3& orientation() const { return orientation_; }

  struct Fit {
    Plane plane;
    bool degenerate = false;  // fewer than 3 points or collinear
  };

  /// Fits the plane. When the points are degenerate `fallback` is returned
  /// with degenerate = true.
  Fit fit(const Plane& fallback) const;

 private:
  std::size_t count_ = 0;
  Vec3 origin_ = Vec3::Zero();
  Vec3 sum_ = Vec3::Zero();
  Eigen::Matrix3d outer_ = Eigen::Matrix3d::Zero();
  Vec3 orientation_ = Vec3::Zero();
};

/// Batch total-least-squares plane (two-pass centroid/covariance).
PlaneAccumulator::Fit fit_plane_batch(std::span<const Vec3> points, const Vec3& orientation,
                                      const Plane& fallback = {});

}  // namespace pss
