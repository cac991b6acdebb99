#include "pss/face_features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pss/medial_axis.hpp"
#include "pss/parallel.hpp"
#include "pss/plane_fit.hpp"

namespace pss {

EigenFeatures neighborhood_eigen_features(std::span<const Vec3> points, std::span<const double> weights) {
  EigenFeatures f;
  if (points.size() < 3 || weights.size() != points.size()) return f;
  double wsum = 0.0;
  Vec3 mean = Vec3::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    wsum += weights[i];
    mean += weights[i] * points[i];
  }
  if (!(wsum > 0.0)) return f;
  mean /= wsum;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 d = points[i] - mean;
    cov += weights[i] * d * d.transpose();
  }
  cov /= wsum;
  const Spectrum3 s = sorted_spectrum(cov);
  const double l1 = s.values[0], l2 = s.values[1], l3 = s.values[2];
  if (!(l1 > 0.0)) return f;
  f.linearity = std::clamp((l1 - l2) / l1, 0.0, 1.0);
  f.planarity = std::clamp((l2 - l3) / l1, 0.0, 1.0);
  f.sphericity = std::clamp(l3 / l1, 0.0, 1.0);
  f.curvature = std::clamp(l3 / (l1 + l2 + l3), 0.0, 1.0 / 3.0);
  f.verticality = std::clamp(1.0 - std::abs(s.vectors.col(2).normalized().z()), 0.0, 1.0);
  f.valid = true;
  return f;
}

double greenness(const Rgb& c) {
  const double g = (2.0 * c[1] - c[0] - c[2]) / 510.0;
  return std::clamp(g, -1.0, 1.0);
}

Vec3 rgb_to_hsv(const Rgb& c) {
  const double r = c[0] / 255.0, g = c[1] / 255.0, b = c[2] / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double delta = mx - mn;
  double h = 0.0;
  if (delta > 0.0) {
    if (mx == r) h = 60.0 * std::fmod((g - b) / delta, 6.0);
    else if (mx == g) h = 60.0 * ((b - r) / delta + 2.0);
    else h = 60.0 * ((r - g) / delta + 4.0);
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
  }
  const double s = mx > 0.0 ? delta / mx : 0.0;
  return {h, s, mx};
}

FaceCentroidIndex FaceCentroidIndex::build(const TriangleMesh& mesh) {
  FaceCentroidIndex idx;
  std::vector<Vec3> pts;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.face_degenerate[f]) continue;
    pts.push_back(mesh.face_centroid[f]);
    idx.face_of.push_back(static_cast<std::int32_t>(f));
  }
  idx.tree = KdTree3(std::move(pts));
  return idx;
}

std::vector<std::vector<double>> elevation_context(const TriangleMesh& mesh, std::span<const double> radii) {
  std::vector<Eigen::Vector2d> xy;
  std::vector<double> z;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.face_degenerate[f]) continue;
    xy.emplace_back(mesh.face_centroid[f].x(), mesh.face_centroid[f].y());
    z.push_back(mesh.face_centroid[f].z());
  }
  const CylinderMinIndex index(std::move(xy), std::move(z));
  std::vector<std::vector<double>> out(radii.size(), std::vector<double>(mesh.num_faces(), 0.0));
  for (std::size_t k = 0; k < radii.size(); ++k) {
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
      const Vec3& c = mesh.face_centroid[f];
      const double m = index.min_within({c.x(), c.y()}, radii[k]);
      out[k][f] = std::isfinite(m) ? std::max(0.0, c.z() - m) : 0.0;
    }
  }
  return out;
}

std::vector<std::string> face_feature_names(const FaceFeatureParams& params) {
  std::vector<std::string> names;
  for (double r : params.eigen_radii) {
    const std::string suffix = "_r" + format_number(r);
    for (const char* base : {"linearity", "planarity", "sphericity", "curvature", "verticality"})
      names.push_back(base + suffix);
  }
  names.push_back("elevation_abs");
  names.push_back("elevation_rel");
  for (double r : params.elevation_radii) names.push_back("elevation_rel_r" + format_number(r));
  names.push_back("inmat_radius");
  names.push_back("vertex_density");
  names.push_back("face_density");
  names.push_back("greenness");
  names.push_back("hue");
  names.push_back("saturation");
  names.push_back("value");
  return names;
}

FeatureTable compute_face_features(const TriangleMesh& mesh, const FaceFeatureParams& params) {
  return compute_face_features(mesh, FaceCentroidIndex::build(mesh), params);
}

FeatureTable compute_face_features(const TriangleMesh& mesh, const FaceCentroidIndex& index,
                                   const FaceFeatureParams& params) {
  for (double r : params.eigen_radii)
    if (!(r > 0.0)) throw InputError("eigen radii must be > 0");
  for (double r : params.elevation_radii)
    if (!(r > 0.0)) throw InputError("elevation radii must be > 0");
  if (!(params.density_radius > 0.0)) throw InputError("density radius must be > 0");

  const std::size_t nf = mesh.num_faces();
  FeatureTable table(face_feature_names(params), nf);
  const std::size_t n_eig = params.eigen_radii.size();
  const std::size_t col_elev = 5 * n_eig;
  const std::size_t col_mat = col_elev + 2 + params.elevation_radii.size();

  double zmin = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < nf; ++f)
    if (!mesh.face_degenerate[f]) zmin = std::min(zmin, mesh.face_centroid[f].z());
  if (!std::isfinite(zmin)) zmin = 0.0;
  const auto rel = elevation_context(mesh, params.elevation_radii);

  // Interior medial-axis radius from the face centroids and normals.
  std::vector<double> inmat(nf, 0.0);
  if (!index.tree.empty()) {
    std::vector<Vec3> normals;
    normals.reserve(index.face_of.size());
    for (auto f : index.face_of) normals.push_back(mesh.face_normal[f]);
    ShrinkingBallParams mp;
    mp.side = BallSide::interior;
    mp.init_radius = params.mat_init_radius;
    mp.denoise_angle_deg = params.mat_denoise_angle_deg;
    mp.threads = params.threads;
    const auto balls = shrinking_ball_transform(index.tree, normals, mp);
    for (std::size_t i = 0; i < balls.size(); ++i) inmat[index.face_of[i]] = balls[i].radius;
  }

  const KdTree3 vertex_tree(mesh.vertices);
  const double density_area = kPi * params.density_radius * params.density_radius;
  const bool colored = mesh.has_colors();
  const double max_radius = params.eigen_radii.empty()
                                ? 0.0
                                : *std::max_element(params.eigen_radii.begin(), params.eigen_radii.end());

  parallel_for_chunks(nf, params.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<double, std::int32_t>> hood;
    std::vector<Vec3> pts;
    std::vector<double> w;
    for (std::size_t f = begin; f < end; ++f) {
      auto row = table.row(f);
      std::uint8_t flags = 0;
      const Vec3& c = mesh.face_centroid[f];
      if (mesh.face_degenerate[f]) flags |= kDegenerateFace;

      // One query at the largest radius, filtered per radius.
      hood.clear();
      if (!index.tree.empty())
        index.tree.for_each_in_radius(c, max_radius, [&](std::int32_t i, double d2) { hood.emplace_back(d2, i); });
      std::sort(hood.begin(), hood.end());
      for (std::size_t k = 0; k < n_eig; ++k) {
        const double r2 = params.eigen_radii[k] * params.eigen_radii[k];
        pts.clear();
        w.clear();
        for (const auto& [d2, i] : hood) {
          if (d2 > r2) break;
          const auto g = index.face_of[i];
          pts.push_back(mesh.face_centroid[g]);
          w.push_back(mesh.face_area[g]);
        }
        const EigenFeatures e = neighborhood_eigen_features(pts, w);
        if (!e.valid) flags |= kSparseNeighborhood;
        row[5 * k + 0] = e.linearity;
        row[5 * k + 1] = e.planarity;
        row[5 * k + 2] = e.sphericity;
        row[5 * k + 3] = e.curvature;
        row[5 * k + 4] = e.verticality;
      }
      row[col_elev] = c.z();
      row[col_elev + 1] = c.z() - zmin;
      for (std::size_t k = 0; k < rel.size(); ++k) row[col_elev + 2 + k] = rel[k][f];
      row[col_mat] = inmat[f];

      std::size_t nverts = 0;
      vertex_tree.for_each_in_radius(c, params.density_radius, [&](std::int32_t, double) { ++nverts; });
      std::size_t nfaces = 0;
      if (!index.tree.empty())
        index.tree.for_each_in_radius(c, params.density_radius, [&](std::int32_t, double) { ++nfaces; });
      row[col_mat + 1] = static_cast<double>(nverts) / density_area;
      row[col_mat + 2] = static_cast<double>(nfaces) / density_area;

      if (colored) {
        const Rgb col = mesh.color_of(f);
        const Vec3 hsv = rgb_to_hsv(col);
        row[col_mat + 3] = greenness(col);
        row[col_mat + 4] = hsv[0];
        row[col_mat + 5] = hsv[1];
        row[col_mat + 6] = hsv[2];
      } else {
        flags |= kNoColor;
      }
      table.flags()[f] = flags;
    }
  });
  return table;
}

}  // namespace pss
