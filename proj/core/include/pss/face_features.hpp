#pragma once

#include <span>
#include <vector>

#include "pss/feature_table.hpp"
#include "pss/kdtree.hpp"
#include "pss/mesh.hpp"

namespace pss {

struct FaceFeatureParams {
  std::vector<double> eigen_radii{0.5, 1.0, 2.0};
  std::vector<double> elevation_radii{10.0, 20.0, 40.0};
  double density_radius = 1.0;
  double mat_init_radius = 0.0;  // <= 0: bounding-box diagonal
  double mat_denoise_angle_deg = 30.0;
  unsigned threads = 1;
};

/// Row flags of the face feature table.
enum FaceFeatureFlag : std::uint8_t {
  kSparseNeighborhood = 1,  // some eigen radius saw fewer than 3 centroids
  kNoColor = 2,             // mesh has no colors; color channels are zero
  kDegenerateFace = 4,
};

struct EigenFeatures {
  double linearity = 0.0;
  double planarity = 0.0;
  double sphericity = 0.0;
  double curvature = 0.0;
  double verticality = 0.0;
  bool valid = false;
};

/// Eigen features of a weighted point neighborhood (weighted covariance,
/// eigenvalues l1 >= l2 >= l3). Fewer than 3 points or l1 == 0 yields all
/// zeros with valid == false.
EigenFeatures neighborhood_eigen_features(std::span<const Vec3> points, std::span<const double> weights);

/// Excess-green index (2G - R - B) / 510, in [-1, 1].
double greenness(const Rgb& c);

/// Hue in degrees [0, 360), saturation and value in [0, 1].
Vec3 rgb_to_hsv(const Rgb& c);

/// k-d tree over the centroids of non-degenerate faces.
struct FaceCentroidIndex {
  KdTree3 tree;
  std::vector<std::int32_t> face_of;  // tree point -> face id

  static FaceCentroidIndex build(const TriangleMesh& mesh);
};

/// For each radius: centroid z minus the minimum centroid z of the
/// non-degenerate faces whose centroid lies within that horizontal distance.
std::vector<std::vector<double>> elevation_context(const TriangleMesh& mesh, std::span<const double> radii);

std::vector<std::string> face_feature_names(const FaceFeatureParams& params);

/// Per-face handcrafted features: eigen features per radius, absolute and
/// relative elevation (global and per cylinder radius), interior medial-axis
/// radius, vertex and face densities, greenness and HSV.
FeatureTable compute_face_features(const TriangleMesh& mesh, const FaceCentroidIndex& index,
                                   const FaceFeatureParams& params);
FeatureTable compute_face_features(const TriangleMesh& mesh, const FaceFeatureParams& params = {});

}  // namespace pss
