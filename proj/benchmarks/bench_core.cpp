#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "meshprox/coords.hpp"
#include "meshprox/dissemination.hpp"
#include "meshprox/rng.hpp"
#include "meshprox/scenario.hpp"
#include "meshprox/simnet.hpp"

using namespace meshprox;
using namespace meshprox::coords;

namespace {

std::vector<NetworkCoordinate> sample_coords(std::size_t n) {
  std::mt19937_64 rng = make_stream(99, "bench");
  std::vector<NetworkCoordinate> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(std::vector<double>{uniform_real(rng, -200.0, 200.0),
                                         uniform_real(rng, -200.0, 200.0)},
                     uniform_real(rng, 0.05, 1.0));
  }
  return out;
}

void BM_PredictRtt(benchmark::State& state) {
  const auto coords = sample_coords(64);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& a = coords[i % coords.size()];
    const auto& b = coords[(i + 7) % coords.size()];
    benchmark::DoNotOptimize(predict_rtt(a, b));
    ++i;
  }
}
BENCHMARK(BM_PredictRtt);

void BM_VivaldiUpdate(benchmark::State& state) {
  auto coords = sample_coords(64);
  VivaldiConfig cfg;
  std::mt19937_64 rng = make_stream(99, "bench_upd");
  std::size_t i = 0;
  for (auto _ : state) {
    auto& self = coords[i % coords.size()];
    const auto& peer = coords[(i + 11) % coords.size()];
    self = vivaldi_update(self, peer, 40.0 + static_cast<double>(i % 50), cfg, rng);
    benchmark::DoNotOptimize(self);
    ++i;
  }
}
BENCHMARK(BM_VivaldiUpdate);

void BM_MergeReports(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  dissemination::ReportTable base;
  std::vector<proxy_load::ProxyEstimate> incoming;
  for (int i = 0; i < n; ++i) {
    proxy_load::ProxyEstimate r;
    r.proxy = "proxy_" + std::to_string(i);
    r.origin = "client_a";
    r.ema_ms = 100.0 + i;
    r.round = i;
    base[r.proxy] = r;
    r.origin = "client_b";
    r.round = i + (i % 2);
    incoming.push_back(r);
  }
  for (auto _ : state) {
    auto merged = dissemination::merge_reports(base, incoming);
    benchmark::DoNotOptimize(merged);
  }
}
BENCHMARK(BM_MergeReports)->Arg(8)->Arg(64);

void BM_PushPullSpread(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng = make_stream(7, "bench_spread");
  for (auto _ : state) {
    benchmark::DoNotOptimize(dissemination::simulate_push_pull_spread(n, rng));
  }
}
BENCHMARK(BM_PushPullSpread)->Arg(64)->Arg(256);

void BM_SimulateRound(benchmark::State& state) {
  // Per-round cost of the full loop on a small deterministic scenario:
  // amortize a whole run over its round count.
  simnet::Scenario sc = simnet::load_scenario(
      std::string(MESHPROX_SCENARIO_DIR) + "/no_faults.json");
  sc.duration_s = 300.0;
  for (auto _ : state) {
    simnet::SimStats stats = simnet::simulate(sc, 1, nullptr);
    benchmark::DoNotOptimize(stats);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(sc.duration_s /
                                                    sc.params.round_period_s));
}
BENCHMARK(BM_SimulateRound)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
