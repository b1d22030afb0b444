#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qdd/complex.hpp"

namespace {

std::vector<double> random_reals(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(count);
  for (double& x : v) {
    x = dist(rng);
  }
  return v;
}

// Interns `range(0)` distinct values, then looks them up again.
void BM_RealLookup(benchmark::State& state, qdd::TableMode mode) {
  const auto values = random_reals(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    qdd::RealTable table(1e-13, 65536, mode);
    for (double x : values) {
      benchmark::DoNotOptimize(table.lookup(x));
    }
    for (double x : values) {
      benchmark::DoNotOptimize(table.lookup(x));
    }
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}

void BM_ComplexArithmetic(benchmark::State& state) {
  qdd::ComplexNumbers cn(1e-13, 65536, 64);
  const auto values = random_reals(1024, 11);
  std::vector<qdd::ComplexValue> interned;
  for (std::size_t i = 0; i + 1 < values.size(); i += 2) {
    interned.push_back(cn.lookup(values[i] * 0.35, values[i + 1] * 0.35));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& a = interned[i % interned.size()];
    const auto& b = interned[(i * 7 + 3) % interned.size()];
    const qdd::ComplexValue p = cn.mul(a, b);
    const qdd::ComplexValue s = cn.add(p, a);
    benchmark::DoNotOptimize(cn.intern(s));  // consumes s
    cn.release(p);
    ++i;
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_RealLookup, bucketed, qdd::TableMode::Bucketed)->Range(1 << 8, 1 << 14);
BENCHMARK_CAPTURE(BM_RealLookup, linear_scan, qdd::TableMode::LinearScan)->Range(1 << 8, 1 << 14);
BENCHMARK(BM_ComplexArithmetic);
