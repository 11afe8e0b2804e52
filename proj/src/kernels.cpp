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

#include "hjcp/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <stdexcept>

namespace hjcp {
namespace {

constexpr std::ptrdiff_t kOmpGrain = 4096;

template <class F>
void parallel_range(std::size_t a, std::size_t b, F&& f) {
  const auto lo = static_cast<std::ptrdiff_t>(a);
  const auto hi = static_cast<std::ptrdiff_t>(b);
#pragma omp parallel for schedule(static) if (hi - lo >= kOmpGrain)
  for (std::ptrdiff_t j = lo; j < hi; ++j) f(static_cast<std::size_t>(j));
}

}  // namespace

DeviceLocal::DeviceLocal(int device, std::size_t block_size)
    : device_(device), block_size_(block_size), workers_(omp_get_max_threads()) {
  results_.resize(static_cast<std::size_t>(workers_));
}

void DeviceLocal::bind(Arena& arena) {
  for (auto& [a, _] : allocs_) {
    if (a == &arena) return;
  }
  std::vector<std::unique_ptr<WorkGroupAllocator>> per_worker;
  for (int w = 0; w < workers_; ++w) {
    per_worker.push_back(std::make_unique<WorkGroupAllocator>(arena, block_size_));
  }
  allocs_.emplace_back(&arena, std::move(per_worker));
}

WorkGroupAllocator& DeviceLocal::alloc(Arena& arena, int worker) {
  for (auto& [a, v] : allocs_) {
    if (a == &arena) return *v[static_cast<std::size_t>(worker)];
  }
  throw std::logic_error("arena not bound to device");
}

WorkGroupAllocator& DeviceLocal::alloc(Arena& arena) { return alloc(arena, omp_get_thread_num()); }

std::vector<RidPair>& DeviceLocal::results() {
  return results_[static_cast<std::size_t>(omp_get_thread_num())];
}

void DeviceLocal::drain_results(JoinResult& out) {
  for (auto& r : results_) {
    out.insert(out.end(), r.begin(), r.end());
    r.clear();
    r.shrink_to_fit();
  }
}

std::uint64_t DeviceLocal::cursor_ops() const {
  std::uint64_t n = 0;
  for (const auto& [_, v] : allocs_) {
    for (const auto& a : v) n += a->cursor_ops();
  }
  return n;
}

void BuildCtx::init(const Relation& r, HashTable& shared_or_cpu, HashTable* gpu_table,
                    TableMode m) {
  rel = &r;
  mode = m;
  tables = {&shared_or_cpu, m == TableMode::Separate ? gpu_table : &shared_or_cpu};
  if (!tables[1]) throw std::invalid_argument("separate mode needs a second table");
  bucket.assign(r.size(), 0);
  node.assign(r.size(), kNone);
  table_of.assign(r.size(), 0);
}

void ProbeCtx::init(const Relation& s, const HashTable& t) {
  rel = &s;
  table = &t;
  bucket.assign(s.size(), 0);
  head.assign(s.size(), kNone);
  node.assign(s.size(), kNone);
}

void run_build_step(StepId s, BuildCtx& ctx, DeviceLocal& dev, std::size_t a, std::size_t b) {
  const Relation& rel = *ctx.rel;
  switch (s) {
    case StepId::B1: {
      const HashTable& t = *ctx.tables[0];
      parallel_range(a, b, [&](std::size_t j) { ctx.bucket[j] = t.bucket_of(rel.keys[j]); });
      break;
    }
    case StepId::B2: {
      const HashTable& t = *ctx.tables[0];
      parallel_range(a, b, [&](std::size_t j) { __builtin_prefetch(&t.bucket(ctx.bucket[j]), 1); });
      break;
    }
    case StepId::B3: {
      const std::uint8_t tid = ctx.mode == TableMode::Separate ? static_cast<std::uint8_t>(dev.device()) : 0;
      HashTable& t = *ctx.tables[tid];
      dev.bind(t.arena());
      parallel_range(a, b, [&](std::size_t j) {
        ctx.table_of[j] = tid;
        ctx.node[j] = t.find_or_create_key(ctx.bucket[j], rel.keys[j], dev.alloc(t.arena()));
      });
      break;
    }
    case StepId::B4: {
      dev.bind(ctx.tables[0]->arena());
      dev.bind(ctx.tables[1]->arena());
      parallel_range(a, b, [&](std::size_t j) {
        HashTable& t = *ctx.tables[ctx.table_of[j]];
        t.append_rid(ctx.bucket[j], ctx.node[j], rel.rids[j], dev.alloc(t.arena()));
      });
      break;
    }
    default:
      throw std::invalid_argument("not a build step");
  }
}

void run_probe_step(StepId s, ProbeCtx& ctx, DeviceLocal& dev, std::size_t a, std::size_t b) {
  const Relation& rel = *ctx.rel;
  const HashTable& t = *ctx.table;
  switch (s) {
    case StepId::P1:
      parallel_range(a, b, [&](std::size_t j) {
        const std::uint32_t i = ctx.tuple(j);
        ctx.bucket[i] = t.bucket_of(rel.keys[i]);
      });
      break;
    case StepId::P2:
      parallel_range(a, b, [&](std::size_t j) {
        const std::uint32_t i = ctx.tuple(j);
        ctx.head[i] = t.bucket(ctx.bucket[i]).key_head.load(std::memory_order_acquire);
      });
      break;
    case StepId::P3:
      parallel_range(a, b, [&](std::size_t j) {
        const std::uint32_t i = ctx.tuple(j);
        ctx.node[i] = t.find_key_from(ctx.head[i], rel.keys[i]);
      });
      break;
    case StepId::P4:
      parallel_range(a, b, [&](std::size_t j) {
        const std::uint32_t i = ctx.tuple(j);
        if (ctx.node[i] == kNone) return;
        auto& out = dev.results();
        t.for_each_rid(ctx.node[i], [&](std::uint32_t r) { out.push_back({r, rel.rids[i]}); });
      });
      break;
    default:
      throw std::invalid_argument("not a probe step");
  }
}

void PartitionPassCtx::init(const Relation& rel, std::size_t r_items, unsigned bits, Arena& a,
                            std::uint32_t s) {
  if (bits > 24) throw std::invalid_argument("more than 24 radix bits");
  in = &rel;
  r_size = r_items;
  bits_after = bits;
  arena = &a;
  seed = s;
  part.assign(rel.size(), 0);
  headers = std::vector<PartHeader>(2 * fanout());
}

void run_partition_step(StepId s, PartitionPassCtx& ctx, DeviceLocal& dev, std::size_t a,
                        std::size_t b) {
  const Relation& rel = *ctx.in;
  const std::uint32_t mask = static_cast<std::uint32_t>(ctx.fanout() - 1);
  switch (s) {
    case StepId::N1:
      parallel_range(a, b, [&](std::size_t j) {
        const std::uint32_t side = j < ctx.r_size ? 0 : static_cast<std::uint32_t>(ctx.fanout());
        ctx.part[j] = side + (murmur2(rel.keys[j], ctx.seed) & mask);
      });
      break;
    case StepId::N2:
      parallel_range(a, b, [&](std::size_t j) { __builtin_prefetch(&ctx.headers[ctx.part[j]], 1); });
      break;
    case StepId::N3: {
      Arena& arena = *ctx.arena;
      dev.bind(arena);
      const std::uint32_t cap = static_cast<std::uint32_t>(ctx.pairs_per_block());
      parallel_range(a, b, [&](std::size_t j) {
        PartHeader& h = ctx.headers[ctx.part[j]];
        // Allocation happens under the latch so blocks are linked in order.
        SpinLatch latch(h.latch);
        if (h.tail == kNone || arena.at<PartBlock>(h.tail)->count == cap) {
          const std::uint32_t off = dev.alloc(arena).alloc(ctx.block_bytes);
          auto* blk = arena.at<PartBlock>(off);
          blk->next = kNone;
          blk->count = 0;
          if (h.tail == kNone) {
            h.head = off;
          } else {
            arena.at<PartBlock>(h.tail)->next = off;
          }
          h.tail = off;
        }
        auto* blk = arena.at<PartBlock>(h.tail);
        auto* pairs = reinterpret_cast<std::uint32_t*>(blk + 1);
        pairs[2 * blk->count] = rel.keys[j];
        pairs[2 * blk->count + 1] = rel.rids[j];
        ++blk->count;
        ++h.count;
      });
      break;
    }
    default:
      throw std::invalid_argument("not a partition step");
  }
}

FlatPartitions flatten_partitions(const PartitionPassCtx& ctx) {
  const std::size_t fan = ctx.fanout();
  FlatPartitions out;
  out.tuples.reserve(ctx.in->size());
  out.r_offsets.assign(fan + 1, 0);
  out.s_offsets.assign(fan + 1, 0);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> buf;  // (rid, key)
  for (std::size_t side = 0; side < 2; ++side) {
    auto& offs = side == 0 ? out.r_offsets : out.s_offsets;
    const std::size_t base = out.tuples.size();
    for (std::size_t p = 0; p < fan; ++p) {
      const PartHeader& h = ctx.headers[side * fan + p];
      buf.clear();
      for (std::uint32_t blk = h.head; blk != kNone; blk = ctx.arena->at<PartBlock>(blk)->next) {
        const auto* b = ctx.arena->at<PartBlock>(blk);
        const auto* pairs = reinterpret_cast<const std::uint32_t*>(b + 1);
        for (std::uint32_t i = 0; i < b->count; ++i) buf.emplace_back(pairs[2 * i + 1], pairs[2 * i]);
      }
      std::sort(buf.begin(), buf.end());
      for (auto [rid, key] : buf) out.tuples.push_back(rid, key);
      offs[p + 1] = out.tuples.size() - base;
    }
  }
  return out;
}

std::size_t partition_arena_bytes(std::size_t items, std::size_t fanout, std::size_t block_bytes,
                                  std::size_t block_size, int workers) {
  const std::size_t per_block = (block_bytes - sizeof(PartBlock)) / 8;
  const std::size_t blocks = items / per_block + 2 * fanout + 4;
  std::size_t bytes = blocks * block_bytes;
  if (block_size >= block_bytes && block_size % block_bytes != 0) bytes += bytes / block_size * block_bytes;
  return bytes + (4 * static_cast<std::size_t>(workers) + 8) * block_size;
}

std::size_t table_arena_bytes(std::size_t tuples, std::size_t block_size, int workers) {
  // A block can strand up to one key node's worth of bytes at its end.
  std::size_t bytes = tuples * (sizeof(KeyNode) + sizeof(RidNode));
  bytes = block_size < 64 ? 2 * bytes : bytes + bytes / (block_size - sizeof(KeyNode)) * sizeof(KeyNode);
  return bytes + (4 * static_cast<std::size_t>(workers) + 8) * block_size;
}

}  // namespace hjcp
