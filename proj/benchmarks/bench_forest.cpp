#include <benchmark/benchmark.h>

#include "pss/common.hpp"
#include "pss/forest.hpp"

namespace {

struct Data {
  pss::FeatureTable table;
  std::vector<std::int32_t> labels;
};

Data make_data(std::size_t rows, std::size_t cols) {
  pss::Rng rng(12);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  Data d{pss::FeatureTable(names, rows), {}};
  for (std::size_t r = 0; r < rows; ++r) {
    const auto y = static_cast<std::int32_t>(pss::uniform_index(rng, 4));
    for (std::size_t c = 0; c < cols; ++c)
      d.table.at(r, c) = pss::normal01(rng) + (c % 4 == static_cast<std::size_t>(y) ? 1.5 : 0.0);
    d.labels.push_back(y);
  }
  return d;
}

void BM_ForestTrain(benchmark::State& state) {
  const auto d = make_data(static_cast<std::size_t>(state.range(0)), 40);
  pss::ForestParams p;
  p.trees = 20;
  p.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(pss::train_forest(d.table, d.labels, p));
}
BENCHMARK(BM_ForestTrain)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
  const auto d = make_data(5000, 40);
  pss::ForestParams p;
  p.trees = 100;
  p.threads = 1;
  const auto model = pss::train_forest(d.table, d.labels, p);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(d.table.row(i), d.table.layout_version()));
    i = (i + 1) % d.labels.size();
  }
}
BENCHMARK(BM_ForestPredict);

}  // namespace
