#include <benchmark/benchmark.h>

#include <map>

#include "common.hpp"
#include "pss/adjacency.hpp"
#include "pss/face_features.hpp"
#include "pss/segment_features.hpp"

namespace {

void BM_FaceFeatures(benchmark::State& state) {
  const auto& m = pss::bench::tile(static_cast<int>(state.range(0)));
  pss::FaceFeatureParams p;
  p.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(pss::compute_face_features(m, p));
  state.counters["faces"] = static_cast<double>(m.num_faces());
}
BENCHMARK(BM_FaceFeatures)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ElevationContext(benchmark::State& state) {
  const auto& m = pss::bench::tile(64);
  const std::vector<double> radii{10.0, 20.0, 40.0};
  for (auto _ : state) benchmark::DoNotOptimize(pss::elevation_context(m, radii));
}
BENCHMARK(BM_ElevationContext)->Unit(benchmark::kMillisecond);

}  // namespace
