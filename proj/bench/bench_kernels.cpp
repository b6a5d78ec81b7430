#include <benchmark/benchmark.h>

#include <random>

#include "cfmm/kernels.hpp"

namespace {

using cfmm::Execution;

std::vector<cfmm::PoolState> pools(std::size_t n) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> log_r(std::log(10.0), std::log(1e5));
  std::uniform_real_distribution<double> tau(0.2, 0.8);
  std::vector<cfmm::PoolState> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::exp(log_r(rng));
    if (i % 2) {
      out.emplace_back(cfmm::ConstantProduct{}, r, r);
    } else {
      const double t = tau(rng);
      out.emplace_back(cfmm::GeometricMean{t}, r, r * (1 - t) / t);
    }
  }
  return out;
}

std::vector<cfmm::MarketPair> pairs(std::size_t n) {
  std::vector<cfmm::MarketPair> out;
  const auto ps = pools(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const cfmm::PoolState& sec = ps[2 * i];
    const cfmm::PoolState ext = cfmm::move_to_price(ps[2 * i + 1], 0.97 * cfmm::spot_price(sec));
    out.push_back(cfmm::make_pair(cfmm::PriceImpactFn::from_pool(ext), cfmm::PriceImpactFn::from_pool(sec)));
  }
  return out;
}

void BM_CurvatureSweep(benchmark::State& state) {
  const auto ps = pools(static_cast<std::size_t>(state.range(0)));
  const auto exec = static_cast<Execution>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(cfmm::curvature_sweep(ps, 0.3, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ResolvePairs(benchmark::State& state) {
  const auto ps = pairs(static_cast<std::size_t>(state.range(0)));
  const auto exec = static_cast<Execution>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(cfmm::resolve_pairs(ps, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateBatch(benchmark::State& state) {
  const cfmm::PoolState ext(cfmm::ConstantProduct{}, 1000, 1000);
  const cfmm::PoolState sec(cfmm::GeometricMean{0.6}, 60, 40);
  const auto seeds = cfmm::derive_seeds(1, static_cast<std::size_t>(state.range(0)));
  const auto exec = static_cast<Execution>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(cfmm::simulate_batch(ext, sec, 0.02, 50, seeds, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// Second argument: 0 serial reference, 1 OpenMP.
BENCHMARK(BM_CurvatureSweep)->ArgsProduct({{64, 512}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResolvePairs)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateBatch)->ArgsProduct({{16, 128}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
