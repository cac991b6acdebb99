#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace pss {

/// Binary pairwise energy
///   E(x) = sum_i unary[i][x_i] + sum_(a,b,w) w * [x_a != x_b].
struct BinaryMrf {
  struct Edge {
    std::int32_t a = 0;
    std::int32_t b = 0;
    double weight = 0.0;
  };

  std::vector<std::array<double, 2>> unary;
  std::vector<Edge> edges;

  std::size_t size() const { return unary.size(); }
  double energy(std::span<const std::uint8_t> labels) const;
};

/// Exact minimizer via max-flow / min-cut (Dinic). Among optimal labelings
/// the one with the fewest 1 labels is returned; it is also the
/// lexicographically smallest. Throws InputError on a negative edge weight
/// or an out-of-range node index.
std::vector<std::uint8_t> min_cut_binary(const BinaryMrf& mrf);

}  // namespace pss
