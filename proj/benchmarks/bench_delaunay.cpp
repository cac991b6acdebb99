#include <benchmark/benchmark.h>

#include "pss/common.hpp"
#include "pss/delaunay.hpp"

namespace {

void BM_Delaunay(benchmark::State& state) {
  pss::Rng rng(9);
  std::vector<pss::Vec3> p(static_cast<std::size_t>(state.range(0)));
  for (auto& x : p) x = pss::Vec3(pss::uniform01(rng), pss::uniform01(rng), pss::uniform01(rng)) * 50.0;
  std::size_t edges = 0;
  for (auto _ : state) edges = pss::delaunay_3d(p).edges.size();
  state.counters["edges"] = static_cast<double>(edges);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Delaunay)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
