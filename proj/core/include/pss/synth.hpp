#pragma once

#include <span>
#include <string>
#include <vector>

#include "pss/mesh.hpp"

namespace pss {

/// Class ids of the synthetic tile.
enum SynthClass : std::int32_t { kTerrain = 0, kHighVegetation = 1, kBuilding = 2, kVehicle = 3 };

const std::vector<std::string>& synth_class_names();

struct SynthParams {
  int ground_size = 64;  // meters; square tile of 1 m cells
  int boxes = 6;
  int trees = 6;
  int vehicles = 3;
  double noise = 0.12;   // relative radial noise amplitude of the trees
  double color_jitter = 12.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthTile {
  TriangleMesh mesh;            // welded, with face labels and colors
  std::size_t gt_components = 0;
};

/// Flat ground grid with axis-aligned buildings (walls and roofs meshed in
/// 1 m cells, stitched into holes cut in the ground), noisy icospheres as
/// trees floating above the ground and small stitched boxes as vehicles.
/// Throws InputError when the objects do not fit on the tile.
SynthTile synth_tile(const SynthParams& params);

/// Icosphere of the given subdivision level (20 * 4^level faces).
TriangleMesh icosphere(int level, const Vec3& center, double radius);

/// 1 for faces whose class is in `nonplanar_classes`, 0 otherwise; -1 stays -1.
std::vector<std::int32_t> planarity_labels(std::span<const std::int32_t> classes,
                                           std::span<const std::int32_t> nonplanar_classes);

}  // namespace pss
