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

#include "hjcp/executor.hpp"

#include <omp.h>

#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>

#include "hjcp/grouping.hpp"
#include "hjcp/partition.hpp"

namespace hjcp {

DeviceTasks make_tasks(const PhaseAssignment& asg, std::size_t x, std::size_t nsteps) {
  DeviceTasks tasks;
  if (asg.chunk == 0) throw std::invalid_argument("assignment needs a chunk size");
  if (!asg.chunk_owner.empty()) {
    for (std::size_t k = 0; k < asg.chunk_owner.size(); ++k) {
      const std::size_t a = k * asg.chunk, b = std::min(x, (k + 1) * asg.chunk);
      if (a < b) tasks[asg.chunk_owner[k]].push_back({-1, a, b});
    }
    return tasks;
  }
  if (asg.splits.size() != nsteps) throw std::invalid_argument("one split per step required");
  for (std::size_t i = 0; i < nsteps; ++i) {
    const std::size_t lo[2] = {0, asg.splits[i]};
    const std::size_t hi[2] = {asg.splits[i], x};
    for (int d = 0; d < 2; ++d) {
      for (std::size_t a = lo[d]; a < hi[d];) {
        const std::size_t b = std::min(hi[d], (a / asg.chunk + 1) * asg.chunk);
        tasks[d].push_back({static_cast<int>(i), a, b});
        a = b;
      }
    }
  }
  return tasks;
}

void execute_phase(PhaseRunner& runner, const DeviceTasks& tasks, std::size_t granule,
                   std::size_t handoff_cap, std::array<DeviceLocal*, 2> devs) {
  const std::size_t n = runner.nsteps();
  const std::size_t x = runner.items();
  const std::size_t ncells = (x + granule - 1) / granule;
  auto cells = [&](const ExecTask& t) {
    return std::pair{t.a / granule, (t.b + granule - 1) / granule};
  };

  std::vector<std::vector<std::uint8_t>> owner(n, std::vector<std::uint8_t>(ncells, 2));
  for (int d = 0; d < 2; ++d) {
    for (const auto& t : tasks[d]) {
      const auto [c0, c1] = cells(t);
      for (std::size_t i = 0; i < n; ++i) {
        if (t.step >= 0 && static_cast<std::size_t>(t.step) != i) continue;
        for (std::size_t c = c0; c < c1; ++c) owner[i][c] = static_cast<std::uint8_t>(d);
      }
    }
  }
  // Items of [a, b) whose owner at step i is not d.
  auto foreign = [&](int d, std::size_t i, const ExecTask& t) {
    std::size_t cnt = 0;
    const auto [c0, c1] = cells(t);
    for (std::size_t c = c0; c < c1; ++c) {
      if (owner[i][c] != d) cnt += std::min(x, (c + 1) * granule) - c * granule;
    }
    return cnt;
  };

  struct Wait {
    bool active = false;
    std::size_t step = 0;
    ExecTask task;
    std::size_t cross_out = 0;
  };
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::vector<std::uint8_t>> done(n, std::vector<std::uint8_t>(ncells, 0));
  std::array<std::size_t, 2> outstanding{0, 0};
  std::array<Wait, 2> waits;
  bool abort = false;
  std::exception_ptr error;

  auto can_go = [&](int d, const Wait& w) {
    if (abort) return true;
    if (w.step > 0 && w.task.step >= 0) {
      const auto [c0, c1] = cells(w.task);
      for (std::size_t c = c0; c < c1; ++c) {
        if (!done[w.step - 1][c]) return false;
      }
    }
    if (handoff_cap > 0 && w.cross_out > 0 && outstanding[d] > 0 &&
        outstanding[d] + w.cross_out > handoff_cap) {
      return false;
    }
    return true;
  };

  auto worker = [&](int d) {
    try {
      for (const ExecTask& t : tasks[d]) {
        const std::size_t first = t.step >= 0 ? static_cast<std::size_t>(t.step) : 0;
        const std::size_t last = t.step >= 0 ? first + 1 : n;
        for (std::size_t i = first; i < last; ++i) {
          Wait w{true, i, t, 0};
          if (handoff_cap > 0 && i + 1 < n) w.cross_out = foreign(d, i + 1, t);
          const std::size_t consumed = handoff_cap > 0 && i > 0 ? foreign(d, i - 1, t) : 0;
          {
            std::unique_lock lk(mu);
            if (!can_go(d, w)) {
              waits[d] = w;
              if (waits[1 - d].active && !can_go(1 - d, waits[1 - d])) {
                abort = true;
                if (!error) {
                  error = std::make_exception_ptr(HandoffDeadlock(
                      "handoff capacity deadlock: both devices wait on each other's queues; raise --handoff-cap"));
                }
                cv.notify_all();
              }
              cv.wait(lk, [&] { return can_go(d, w); });
              waits[d].active = false;
            }
            if (abort) return;
            outstanding[1 - d] -= std::min(outstanding[1 - d], consumed);
          }
          cv.notify_all();
          runner.run(i, *devs[d], t.a, t.b);
          {
            std::lock_guard lk(mu);
            const auto [c0, c1] = cells(t);
            for (std::size_t c = c0; c < c1; ++c) done[i][c] = 1;
            outstanding[d] += w.cross_out;
          }
          cv.notify_all();
        }
      }
    } catch (...) {
      std::lock_guard lk(mu);
      if (!error) error = std::current_exception();
      abort = true;
      cv.notify_all();
    }
  };

  // Each device thread gets half the OpenMP workers of the host.
  const int inner = std::max(1, omp_get_max_threads() / 2);
  std::thread gpu([&] {
    omp_set_num_threads(inner);
    worker(1);
  });
  omp_set_num_threads(std::max(1, omp_get_max_threads()));
  worker(0);
  gpu.join();
  if (error) std::rethrow_exception(error);
}

namespace {

constexpr int kCpuDev = 0;
constexpr int kGpuDev = 1;

struct PartitionRunner : PhaseRunner {
  PartitionPassCtx& ctx;
  explicit PartitionRunner(PartitionPassCtx& c) : ctx(c) {}
  std::size_t nsteps() const override { return 3; }
  std::size_t items() const override { return ctx.in->size(); }
  void run(std::size_t i, DeviceLocal& dev, std::size_t a, std::size_t b) override {
    run_partition_step(kPartitionSeries[i], ctx, dev, a, b);
  }
};

struct BuildRunner : PhaseRunner {
  BuildCtx& ctx;
  explicit BuildRunner(BuildCtx& c) : ctx(c) {}
  std::size_t nsteps() const override { return 4; }
  std::size_t items() const override { return ctx.rel->size(); }
  void run(std::size_t i, DeviceLocal& dev, std::size_t a, std::size_t b) override {
    run_build_step(kBuildSeries[i], ctx, dev, a, b);
  }
};

struct ProbeRunner : PhaseRunner {
  ProbeCtx& ctx;
  std::vector<StepId> steps;
  ProbeRunner(ProbeCtx& c, std::vector<StepId> s) : ctx(c), steps(std::move(s)) {}
  std::size_t nsteps() const override { return steps.size(); }
  std::size_t items() const override { return ctx.rel->size(); }
  void run(std::size_t i, DeviceLocal& dev, std::size_t a, std::size_t b) override {
    run_probe_step(steps[i], ctx, dev, a, b);
  }
};

// One private SHJ per partition pair.
struct CoarseRunner : PhaseRunner {
  const PartitionedPair& parts;
  std::uint32_t seed;
  std::size_t block_size;
  CoarseRunner(const PartitionedPair& p, std::uint32_t s, std::size_t bs)
      : parts(p), seed(s), block_size(bs) {}
  std::size_t nsteps() const override { return 1; }
  std::size_t items() const override { return parts.r.partitions(); }
  void run(std::size_t, DeviceLocal& dev, std::size_t a, std::size_t b) override {
    const auto lo = static_cast<std::ptrdiff_t>(a), hi = static_cast<std::ptrdiff_t>(b);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t p = lo; p < hi; ++p) {
      const auto rk = parts.r.keys(static_cast<std::size_t>(p));
      const auto rr = parts.r.rids(static_cast<std::size_t>(p));
      const auto sk = parts.s.keys(static_cast<std::size_t>(p));
      const auto sr = parts.s.rids(static_cast<std::size_t>(p));
      if (rk.empty() || sk.empty()) continue;
      Arena arena(table_arena_bytes(rk.size(), block_size, 1));
      WorkGroupAllocator alloc(arena, block_size);
      HashTable table(next_pow2(rk.size()), arena, seed);
      for (std::size_t i = 0; i < rk.size(); ++i) table.insert(rk[i], rr[i], alloc);
      auto& out = dev.results();
      for (std::size_t i = 0; i < sk.size(); ++i) {
        const std::uint32_t node = table.find_key(table.bucket_of(sk[i]), sk[i]);
        if (node != kNone) table.for_each_rid(node, [&](std::uint32_t rid) { out.push_back({rid, sr[i]}); });
      }
    }
  }
};

Relation concat(const Relation& a, const Relation& b) {
  Relation out = a;
  out.rids.insert(out.rids.end(), b.rids.begin(), b.rids.end());
  out.keys.insert(out.keys.end(), b.keys.begin(), b.keys.end());
  return out;
}

}  // namespace

FunctionalRun run_functional(const Workload& w, Scheme scheme,
                             const std::vector<PhaseAssignment>& asg, std::size_t granule) {
  const auto sched = w.schedule(scheme);
  if (asg.size() != sched.size()) throw std::invalid_argument("one assignment per phase required");
  const EngineConfig& cfg = w.cfg;
  const TableMode mode = cfg.effective_table_mode();
  FunctionalRun out;
  std::size_t k = 0;

  auto run_phase = [&](PhaseRunner& runner, auto&& bind_and_go) {
    DeviceLocal cpu(kCpuDev, cfg.block_size), gpu(kGpuDev, cfg.block_size);
    bind_and_go(cpu, gpu);
    const DeviceTasks tasks = make_tasks(asg[k], runner.items(), runner.nsteps());
    execute_phase(runner, tasks, granule, cfg.handoff_cap, {&cpu, &gpu});
    out.cursor_ops += cpu.cursor_ops() + gpu.cursor_ops();
    cpu.drain_results(out.result);
    gpu.drain_results(out.result);
    ++k;
  };
  auto no_bind = [](DeviceLocal&, DeviceLocal&) {};

  const Relation* br = w.r;
  const Relation* pr = w.s;
  if (cfg.algo == Algo::PHJ) {
    if (cfg.passes == 0 || cfg.pass_bits == 0) {
      out.partitions.r = PartitionSet{cfg.pass_bits, cfg.passes, *w.r, {0, w.r->size()}};
      out.partitions.s = PartitionSet{cfg.pass_bits, cfg.passes, *w.s, {0, w.s->size()}};
    } else {
      Relation cur = concat(*w.r, *w.s);
      FlatPartitions flat;
      for (unsigned p = 0; p < cfg.passes; ++p) {
        const unsigned bits = cfg.pass_bits * (p + 1);
        PartitionPassCtx ctx;
        Arena arena(partition_arena_bytes(cur.size(), std::size_t{1} << bits, ctx.block_bytes,
                                          cfg.block_size, 2 * omp_get_max_threads()));
        ctx.init(cur, w.r->size(), bits, arena, cfg.seed);
        PartitionRunner runner(ctx);
        run_phase(runner, no_bind);
        flat = flatten_partitions(ctx);
        cur = flat.tuples;
      }
      out.partitions = split_flat(std::move(flat), w.r->size(), cfg.pass_bits, cfg.passes);
    }
    br = &out.partitions.r.tuples;
    pr = &out.partitions.s.tuples;
  }

  if (scheme == Scheme::CoarsePL) {
    CoarseRunner runner(out.partitions, cfg.seed, cfg.block_size);
    run_phase(runner, no_bind);
    return out;
  }

  const unsigned bits = cfg.radix_bits();
  const BucketMap map = BucketMap::partitioned(bucket_count_for(br->size(), bits), bits);
  const int workers = 2 * omp_get_max_threads() + 1;
  Arena cpu_arena(table_arena_bytes(br->size() + 1, cfg.block_size, workers));
  HashTable cpu_table(map, cpu_arena, cfg.seed);
  std::unique_ptr<Arena> gpu_arena;
  std::unique_ptr<HashTable> gpu_table;
  if (mode == TableMode::Separate) {
    gpu_arena = std::make_unique<Arena>(table_arena_bytes(br->size() + 1, cfg.block_size, workers));
    gpu_table = std::make_unique<HashTable>(map, *gpu_arena, cfg.seed);
  }
  {
    BuildCtx ctx;
    ctx.init(*br, cpu_table, gpu_table.get(), mode);
    BuildRunner runner(ctx);
    run_phase(runner, no_bind);
  }
  if (gpu_table) {
    WorkGroupAllocator merge_alloc(cpu_arena, cfg.block_size);
    ht_merge(cpu_table, *gpu_table, merge_alloc);
    out.cursor_ops += merge_alloc.cursor_ops();
  }

  ProbeCtx ctx;
  ctx.init(*pr, cpu_table);
  if (cfg.groups <= 1) {
    ProbeRunner runner(ctx, kProbeSeries);
    run_phase(runner, no_bind);
  } else {
    ProbeRunner head(ctx, {StepId::P1, StepId::P2});
    run_phase(head, no_bind);
    // Regroup by the key-list length of each item's bucket.
    std::vector<std::uint32_t> measure(pr->size());
    for (std::size_t i = 0; i < pr->size(); ++i) {
      measure[i] = cpu_table.bucket(ctx.bucket[i]).key_count.load(std::memory_order_relaxed);
    }
    const auto order = group_by_workload(measure, cfg.groups);
    ctx.order = &order;
    ProbeRunner tail(ctx, {StepId::P3, StepId::P4});
    run_phase(tail, no_bind);
    ctx.order = nullptr;
  }
  return out;
}

}  // namespace hjcp
