#include <benchmark/benchmark.h>

#include <map>

#include "common.hpp"
#include "pss/adjacency.hpp"
#include "pss/mincut.hpp"
#include "pss/overseg.hpp"

namespace {

// Planarity map from the ground-truth classes: trees non-planar.
pss::ProbabilityMap label_probmap(const pss::TriangleMesh& m) {
  pss::ProbabilityMap pm;
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    const bool np = m.face_label[f] == pss::kHighVegetation;
    pm.nonplanar.push_back(np ? 0.9 : 0.1);
    pm.log_nonplanar.push_back(std::log(pm.nonplanar.back()));
    pm.planar.push_back(1.0 - pm.nonplanar.back());
    pm.label.push_back(np);
  }
  return pm;
}

void BM_Oversegment(benchmark::State& state) {
  const auto& m = pss::bench::tile(static_cast<int>(state.range(0)));
  const auto adj = pss::AdjacencyIndex::build(m);
  const auto pm = label_probmap(m);
  std::size_t segments = 0;
  for (auto _ : state) segments = pss::oversegment(m, adj, pm, pss::GrowthParams{}).size();
  state.counters["faces"] = static_cast<double>(m.num_faces());
  state.counters["segments"] = static_cast<double>(segments);
}
BENCHMARK(BM_Oversegment)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MinCut(benchmark::State& state) {
  pss::Rng rng(4);
  const auto n = static_cast<std::size_t>(state.range(0));
  pss::BinaryMrf mrf;
  for (std::size_t i = 0; i < n; ++i) mrf.unary.push_back({pss::uniform(rng, -1, 1), pss::uniform(rng, -1, 1)});
  for (std::size_t i = 0; i + 1 < n; ++i) {
    mrf.edges.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(i + 1), pss::uniform01(rng)});
    const auto j = pss::uniform_index(rng, n);
    if (j != i) mrf.edges.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), pss::uniform01(rng)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(pss::min_cut_binary(mrf));
}
BENCHMARK(BM_MinCut)->Arg(100)->Arg(10000);

}  // namespace
