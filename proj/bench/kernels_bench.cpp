/*
 * Copyright 2026 The hjcp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include "hjcp/join.hpp"
#include "hjcp/kernels.hpp"
#include "hjcp/relation.hpp"

using namespace hjcp;

namespace {

struct Inputs {
  Relation r, s;
  explicit Inputs(std::size_t n) : r(gen_uniform(n, KeyRange{}, 1)), s(gen_probe(r, n, 1.0, 2)) {}
};

void BM_ShjSerial(benchmark::State& st) {
  const Inputs in(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(shj_serial(in.r, in.s));
  st.SetItemsProcessed(st.iterations() * st.range(0) * 2);
}

// Same join through the OpenMP step kernels on one device.
void BM_ShjOpenMP(benchmark::State& st) {
  const Inputs in(static_cast<std::size_t>(st.range(0)));
  const std::size_t n = in.r.size();
  for (auto _ : st) {
    DeviceLocal dev(0, kDefaultBlockSize);
    Arena arena(table_arena_bytes(n + 1, kDefaultBlockSize, dev.workers()));
    HashTable t(next_pow2(n), arena);
    BuildCtx b;
    b.init(in.r, t, nullptr, TableMode::Shared);
    for (StepId s : kBuildSeries) run_build_step(s, b, dev, 0, n);
    ProbeCtx p;
    p.init(in.s, t);
    for (StepId s : kProbeSeries) run_probe_step(s, p, dev, 0, in.s.size());
    JoinResult out;
    dev.drain_results(out);
    benchmark::DoNotOptimize(out);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * 2);
}

void BM_PhjSerial(benchmark::State& st) {
  const Inputs in(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(phj_serial(in.r, in.s, 6, 2));
  st.SetItemsProcessed(st.iterations() * st.range(0) * 2);
}

void BM_PartitionPassOpenMP(benchmark::State& st) {
  const Inputs in(static_cast<std::size_t>(st.range(0)));
  Relation both = in.r;
  both.rids.insert(both.rids.end(), in.s.rids.begin(), in.s.rids.end());
  both.keys.insert(both.keys.end(), in.s.keys.begin(), in.s.keys.end());
  for (auto _ : st) {
    DeviceLocal dev(0, kDefaultBlockSize);
    PartitionPassCtx ctx;
    Arena arena(partition_arena_bytes(both.size(), 64, ctx.block_bytes, kDefaultBlockSize, dev.workers()));
    ctx.init(both, in.r.size(), 6, arena, kDefaultHashSeed);
    for (StepId s : kPartitionSeries) run_partition_step(s, ctx, dev, 0, both.size());
    benchmark::DoNotOptimize(flatten_partitions(ctx));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * 2);
}

}  // namespace

BENCHMARK(BM_ShjSerial)->RangeMultiplier(4)->Range(1 << 14, 1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShjOpenMP)->RangeMultiplier(4)->Range(1 << 14, 1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhjSerial)->RangeMultiplier(4)->Range(1 << 14, 1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PartitionPassOpenMP)->RangeMultiplier(4)->Range(1 << 14, 1 << 20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
