#include <benchmark/benchmark.h>

#include "qdd/circuit.hpp"
#include "qdd/package.hpp"

namespace {

void BM_BuildQft(benchmark::State& state) {
  const qdd::Circuit c = qdd::gen_qft(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    qdd::Package pkg;
    benchmark::DoNotOptimize(qdd::build_functionality(pkg, c));
  }
}

void BM_BuildSupremacy(benchmark::State& state, qdd::TableMode mode) {
  const qdd::Circuit c = qdd::gen_supremacy(4, 4, 20, 1);
  const auto prefix = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    qdd::PackageConfig config;
    config.table_mode = mode;
    qdd::Package pkg(config);
    benchmark::DoNotOptimize(qdd::build_functionality(pkg, c, prefix));
    state.counters["reals_peak"] = static_cast<double>(pkg.stats().reals.peak);
    state.counters["nodes_peak"] = static_cast<double>(pkg.stats().matrix_nodes.peak);
  }
}

void BM_SimulateSupremacy(benchmark::State& state) {
  const qdd::Circuit c = qdd::gen_supremacy(4, 4, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    qdd::Package pkg;
    benchmark::DoNotOptimize(qdd::simulate(pkg, c));
  }
}

}  // namespace

BENCHMARK(BM_BuildQft)->DenseRange(4, 12, 4)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_BuildSupremacy, bucketed, qdd::TableMode::Bucketed)
    ->Arg(60)
    ->Arg(100)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_BuildSupremacy, linear_scan, qdd::TableMode::LinearScan)
    ->Arg(60)
    ->Arg(100)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateSupremacy)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);
