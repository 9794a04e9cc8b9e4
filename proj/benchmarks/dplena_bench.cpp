// Copyright 2026 The dplena-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <array>
#include <random>
#include <vector>

#include "dplena/codegen.hpp"
#include "dplena/driver.hpp"
#include "dplena/logits_stub.hpp"
#include "dplena/numerics.hpp"
#include "dplena/oracle.hpp"
#include "dplena/units.hpp"

namespace {

using namespace dplena;

std::vector<Bf16> random_row(std::size_t n) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> d(-8.0f, 8.0f);
  std::vector<Bf16> row(n);
  for (auto& v : row) v = Bf16::from_float(d(rng));
  return row;
}

void BM_MxDecode(benchmark::State& state) {
  std::array<float, kMxBlockElements> values{};
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(i) * 0.37f - 5.0f;
  const auto block = mx_encode(values);
  for (auto _ : state) benchmark::DoNotOptimize(mx_decode(block));
  state.SetItemsProcessed(state.iterations() * kMxBlockElements);
}
BENCHMARK(BM_MxDecode);

void BM_ReduceMaxIdx(benchmark::State& state) {
  const auto row = random_row(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reduce_max_idx(row, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReduceMaxIdx)->Arg(64)->Arg(2048);

void BM_ElementwiseExp(benchmark::State& state) {
  const auto source = random_row(static_cast<std::size_t>(state.range(0)));
  auto row = source;
  for (auto _ : state) {
    row = source;
    elementwise_exp(row);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ElementwiseExp)->Arg(64)->Arg(2048);

void BM_TopkMask(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto row = random_row(n);
  std::vector<float> conf(n);
  for (std::size_t i = 0; i < n; ++i) conf[i] = row[i].to_float();
  const std::vector<std::uint8_t> eligible(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(topk_mask(conf, eligible, n / 4));
}
BENCHMARK(BM_TopkMask)->Arg(32)->Arg(64);

void BM_StableMax(benchmark::State& state) {
  const auto row = random_row(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stable_max(row, 64));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StableMax)->Arg(2000)->Arg(128000);

void BM_SimulateDefault(benchmark::State& state) {
  SimConfig c;
  c.sampling.steps = static_cast<std::uint32_t>(state.range(0));
  const auto hbm = build_logits_hbm(c.sampling);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(c, hbm).report.total_cycles);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.sampling.total_logits()));
}
BENCHMARK(BM_SimulateDefault)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
