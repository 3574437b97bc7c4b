// Serial reference vs OpenMP kernels, plus the end-to-end table build.
//
//   playstyle_bench --benchmark_filter=Dense

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "playstyle/discretizer.hpp"
#include "playstyle/hsd.hpp"
#include "playstyle/kernels.hpp"
#include "playstyle/sim.hpp"

using namespace playstyle;

namespace {

std::vector<float> random_floats(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1, 1);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Shapes of the hierarchy-1 encoder layer on a 256-sample chunk.
constexpr std::size_t kRows = 256, kIn = 512, kOut = 256;

template <bool Parallel>
void BM_DenseForward(benchmark::State& state) {
  const auto x = random_floats(kRows * kIn, 1), w = random_floats(kOut * kIn, 2), b = random_floats(kOut, 3);
  std::vector<float> y(kRows * kOut);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::dense_forward<float>(x, w, b, y, kRows, kIn, kOut);
    } else {
      kernels::serial::dense_forward<float>(x, w, b, y, kRows, kIn, kOut);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * kRows * kIn * kOut);
}

template <bool Parallel>
void BM_DenseBackwardParams(benchmark::State& state) {
  const auto x = random_floats(kRows * kIn, 1), dy = random_floats(kRows * kOut, 2);
  std::vector<float> dw(kOut * kIn), db(kOut);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::dense_backward_params<float>(x, dy, dw, db, kRows, kIn, kOut);
    } else {
      kernels::serial::dense_backward_params<float>(x, dy, dw, db, kRows, kIn, kOut);
    }
    benchmark::DoNotOptimize(dw.data());
  }
  state.SetItemsProcessed(state.iterations() * kRows * kIn * kOut);
}

template <bool Parallel>
void BM_NearestRows(benchmark::State& state) {
  const std::size_t n = 256 * 64, d = 8, k = 16;
  const auto z = random_floats(n * d, 4), book = random_floats(k * d, 5);
  std::vector<std::uint32_t> codes(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::nearest_rows<float>(z, book, codes, n, d, k);
    } else {
      kernels::serial::nearest_rows<float>(z, book, codes, n, d, k);
    }
    benchmark::DoNotOptimize(codes.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

const PlayDataset& racer_data() {
  static const PlayDataset ds = generate_style_dataset(SimConfig{}, make_style(70, 2), 1024, 1);
  return ds;
}

template <bool Parallel>
void BM_StateTableLrd(benchmark::State& state) {
  const auto mapper = StateMapper::lrd();
  for (auto _ : state) {
    auto t = Parallel ? build_state_table(mapper, racer_data()) : serial::build_state_table(mapper, racer_data());
    benchmark::DoNotOptimize(t.num_states());
  }
  state.SetItemsProcessed(state.iterations() * racer_data().size());
}

template <bool Parallel>
void BM_StateTableHsd(benchmark::State& state) {
  const auto mapper = StateMapper::hsd(std::make_shared<const HsdModel>(init_model(HsdConfig{})), 1);
  for (auto _ : state) {
    auto t = Parallel ? build_state_table(mapper, racer_data()) : serial::build_state_table(mapper, racer_data());
    benchmark::DoNotOptimize(t.num_states());
  }
  state.SetItemsProcessed(state.iterations() * racer_data().size());
}

}  // namespace

BENCHMARK(BM_DenseForward<false>)->Name("DenseForward/serial")->UseRealTime();
BENCHMARK(BM_DenseForward<true>)->Name("DenseForward/parallel")->UseRealTime();
BENCHMARK(BM_DenseBackwardParams<false>)->Name("DenseBackwardParams/serial")->UseRealTime();
BENCHMARK(BM_DenseBackwardParams<true>)->Name("DenseBackwardParams/parallel")->UseRealTime();
BENCHMARK(BM_NearestRows<false>)->Name("NearestRows/serial")->UseRealTime();
BENCHMARK(BM_NearestRows<true>)->Name("NearestRows/parallel")->UseRealTime();
BENCHMARK(BM_StateTableLrd<false>)->Name("StateTableLrd/serial")->UseRealTime();
BENCHMARK(BM_StateTableLrd<true>)->Name("StateTableLrd/parallel")->UseRealTime();
BENCHMARK(BM_StateTableHsd<false>)->Name("StateTableHsd/serial")->UseRealTime();
BENCHMARK(BM_StateTableHsd<true>)->Name("StateTableHsd/parallel")->UseRealTime();

BENCHMARK_MAIN();
