// Serial reference kernels against their OpenMP counterparts, plus one training epoch.

#include <benchmark/benchmark.h>

#include "freedst/kernels.hpp"
#include "freedst/state_graph.hpp"
#include "freedst/vgae.hpp"

namespace {

using freedst::Matrix;
using freedst::Rng;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (auto& x : m.data()) x = rng.uniform(-1.0, 1.0);
  return m;
}

template <Matrix (*Fn)(const Matrix&, const Matrix&)>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1);
  const Matrix b = random_matrix(n, 32, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * 32));
}

BENCHMARK(BM_Matmul<freedst::kernels::serial::matmul>)->Name("matmul/serial")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_Matmul<freedst::kernels::parallel::matmul>)->Name("matmul/parallel")->RangeMultiplier(2)->Range(64, 512);

template <freedst::kernels::BceResult (*Fn)(const Matrix&, const Matrix&, double)>
void BM_Bce(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix logits = random_matrix(n, n, 3);
  Matrix targets(n, n);
  Rng rng(4);
  for (auto& x : targets.data()) x = rng.uniform01() < 0.1 ? 1.0 : 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(logits, targets, 9.0));
}

BENCHMARK(BM_Bce<freedst::kernels::serial::weighted_bce>)->Name("bce/serial")->Arg(256)->Arg(512);
BENCHMARK(BM_Bce<freedst::kernels::parallel::weighted_bce>)->Name("bce/parallel")->Arg(256)->Arg(512);

void BM_TrainEpoch(benchmark::State& state) {
  const auto per_block = static_cast<std::size_t>(state.range(0));
  freedst::StateGraph g;
  Rng rng(42);
  for (std::size_t d = 0; d < 3; ++d) g.add_domain("d" + std::to_string(d));
  for (std::size_t d = 0; d < 3; ++d) {
    for (std::size_t v = 0; v < per_block; ++v) {
      const auto sv = g.add_slot_value("s" + std::to_string(d), "v" + std::to_string(v));
      for (std::size_t e = 0; e < 3; ++e) {
        if (rng.uniform01() < (e == d ? 0.8 : 0.05)) g.add_edge(e, sv);
      }
    }
  }
  const auto split = freedst::split_edges(g, {}, 42);
  freedst::TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(freedst::train(g, split, cfg));
}

BENCHMARK(BM_TrainEpoch)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
