#include <benchmark/benchmark.h>

#include "sst/bandwidth.hpp"
#include "sst/graph.hpp"
#include "sst/rng.hpp"
#include "sst/scenario.hpp"
#include "sst/sim.hpp"

namespace {

using namespace sst;

void BM_GenerateBa(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(graph::generate_ba(n, graph::BaParams{}, seed++));
}
BENCHMARK(BM_GenerateBa)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GenerateToivonen(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(graph::generate_toivonen(n, graph::ToParams{}, seed++));
}
BENCHMARK(BM_GenerateToivonen)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GraphProperties(benchmark::State& state) {
  const auto g = graph::generate_toivonen(static_cast<std::size_t>(state.range(0)), graph::ToParams{}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(graph::graph_properties(g));
}
BENCHMARK(BM_GraphProperties)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

// Random flows over `peers` peers, eight per downloader, some of them helpers.
void BM_AllocateBandwidth(benchmark::State& state) {
  const auto peers = static_cast<std::uint32_t>(state.range(0));
  Rng rng(3);
  sim::BandwidthCaps caps;
  caps.upload.assign(peers, 125e3);
  caps.download.assign(peers, 1e6);
  std::vector<sim::FlowRequest> flows;
  for (std::uint32_t d = 0; d < peers; d += 3) {
    for (int k = 0; k < 8; ++k) {
      sim::FlowRequest f;
      f.downloader = d;
      do f.uploader = static_cast<std::uint32_t>(rng.below(peers));
      while (f.uploader == d);
      f.priority = k < 2;
      flows.push_back(f);
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(sim::allocate_bandwidth(flows, caps));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(flows.size()));
}
BENCHMARK(BM_AllocateBandwidth)->Arg(300)->Arg(2000)->Unit(benchmark::kMicrosecond);

// One simulated hour of preset f at desk scale, after a warm-up hour.
void BM_SimulateHour(benchmark::State& state) {
  ScenarioConfig c;
  c.write_transfer_log = false;
  c = scenario::expand_preset(scenario::PresetId::kF, c);
  for (auto _ : state) {
    state.PauseTiming();
    auto w = sim::init_world(c);
    for (int i = 0; i < 60; ++i) sim::tick(w);
    state.ResumeTiming();
    for (int i = 0; i < 60; ++i) sim::tick(w);
  }
}
BENCHMARK(BM_SimulateHour)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
