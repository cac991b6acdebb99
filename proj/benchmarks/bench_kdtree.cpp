#include <benchmark/benchmark.h>

#include "pss/common.hpp"
#include "pss/kdtree.hpp"

namespace {

std::vector<pss::Vec3> cloud(std::size_t n) {
  pss::Rng rng(1);
  std::vector<pss::Vec3> p(n);
  for (auto& x : p) x = pss::Vec3(pss::uniform(rng, 0, 100), pss::uniform(rng, 0, 100), pss::uniform(rng, 0, 10));
  return p;
}

void BM_KdBuild(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pss::KdTree3(pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdBuild)->Arg(10000)->Arg(100000);

void BM_KdKnn16(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)));
  const pss::KdTree3 tree(pts);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.knn(pts[i], 16));
    i = (i + 7919) % pts.size();
  }
}
BENCHMARK(BM_KdKnn16)->Arg(10000)->Arg(100000);

void BM_KdRadius(benchmark::State& state) {
  const auto pts = cloud(100000);
  const pss::KdTree3 tree(pts);
  const double r = static_cast<double>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.radius(pts[i], r));
    i = (i + 7919) % pts.size();
  }
}
BENCHMARK(BM_KdRadius)->Arg(1)->Arg(2);

}  // namespace
