#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pss/mincut.hpp"
#include "pss/overseg.hpp"

namespace pss::testing {

/// Minimum energy over all 2^n labelings.
inline double brute_min_energy(const BinaryMrf& mrf) {
  const std::size_t n = mrf.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> x(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1u;
    best = std::min(best, mrf.energy(x));
  }
  return best;
}

inline double brute_min_frontier(std::span<const FrontierTerm> terms, const GrowthParams& p) {
  const std::size_t n = terms.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> x(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1u;
    best = std::min(best, frontier_energy(terms, x, p));
  }
  return best;
}

/// Random multiple of 1/64 in [lo, hi]; sums of these are exact in double.
inline double dyadic(Rng& rng, double lo, double hi) {
  const auto steps = static_cast<std::uint64_t>((hi - lo) * 64.0);
  return lo + static_cast<double>(uniform_index(rng, steps + 1)) / 64.0;
}

inline BinaryMrf random_mrf(Rng& rng, std::size_t n) {
  BinaryMrf m;
  for (std::size_t i = 0; i < n; ++i) m.unary.push_back({dyadic(rng, -2, 2), dyadic(rng, -2, 2)});
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (uniform01(rng) < 0.35)
        m.edges.push_back({static_cast<std::int32_t>(a), static_cast<std::int32_t>(b), dyadic(rng, 0, 2)});
  return m;
}

inline std::vector<FrontierTerm> random_frontier(Rng& rng, std::size_t n) {
  std::vector<FrontierTerm> t(n);
  for (auto& x : t) {
    const double m = dyadic(rng, 0, 1.5);
    x.unary = {m, 1.0 - m};
    x.pairwise = dyadic(rng, 0, 1);
  }
  return t;
}

inline GrowthParams random_growth(Rng& rng) {
  GrowthParams p;
  p.lambda_d = dyadic(rng, 0, 3);
  p.lambda_m = dyadic(rng, 0, 2);
  return p;
}

}  // namespace pss::testing
