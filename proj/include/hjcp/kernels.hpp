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

#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "hjcp/allocator.hpp"
#include "hjcp/hashtable.hpp"
#include "hjcp/relation.hpp"
#include "hjcp/steps.hpp"

namespace hjcp {

struct RidPair {
  std::uint32_t r_rid;
  std::uint32_t s_rid;
  auto operator<=>(const RidPair&) const = default;
};
using JoinResult = std::vector<RidPair>;

// Per-device scratch: one allocator per (arena, worker) and one result buffer
// per worker. Arenas must be bound before a parallel kernel touches them.
class DeviceLocal {
 public:
  DeviceLocal(int device, std::size_t block_size);

  int device() const { return device_; }
  int workers() const { return workers_; }
  void bind(Arena& arena);
  WorkGroupAllocator& alloc(Arena& arena, int worker);
  WorkGroupAllocator& alloc(Arena& arena);  // current OpenMP worker
  std::vector<RidPair>& results(int worker) { return results_[worker]; }
  std::vector<RidPair>& results();
  void drain_results(JoinResult& out);
  std::uint64_t cursor_ops() const;

 private:
  int device_;
  std::size_t block_size_;
  int workers_;
  std::vector<std::pair<Arena*, std::vector<std::unique_ptr<WorkGroupAllocator>>>> allocs_;
  std::vector<std::vector<RidPair>> results_;
};

struct BuildCtx {
  const Relation* rel = nullptr;
  std::array<HashTable*, 2> tables{nullptr, nullptr};
  TableMode mode = TableMode::Shared;
  std::vector<std::uint32_t> bucket;
  std::vector<std::uint32_t> node;
  std::vector<std::uint8_t> table_of;

  void init(const Relation& r, HashTable& shared_or_cpu, HashTable* gpu_table, TableMode m);
};

struct ProbeCtx {
  const Relation* rel = nullptr;
  const HashTable* table = nullptr;
  // Item order for the tail steps when grouping is on; empty = identity.
  const std::vector<std::uint32_t>* order = nullptr;
  std::vector<std::uint32_t> bucket;
  std::vector<std::uint32_t> head;
  std::vector<std::uint32_t> node;

  void init(const Relation& s, const HashTable& t);
  std::uint32_t tuple(std::size_t item) const {
    return order && !order->empty() ? (*order)[item] : static_cast<std::uint32_t>(item);
  }
};

struct PartHeader {
  std::atomic<std::uint32_t> latch{0};
  std::uint32_t head = kNone;
  std::uint32_t tail = kNone;
  std::uint32_t count = 0;
};

struct PartBlock {
  std::uint32_t next;
  std::uint32_t count;
};

// One partition pass over a relation (or an R run followed by an S run).
// Items below r_size belong to R.
struct PartitionPassCtx {
  const Relation* in = nullptr;
  std::size_t r_size = 0;
  std::uint32_t seed = kDefaultHashSeed;
  unsigned bits_after = 0;  // radix bits fixed once this pass is done
  std::size_t block_bytes = 256;
  Arena* arena = nullptr;
  std::vector<std::uint32_t> part;
  std::vector<PartHeader> headers;  // R partitions, then S partitions

  void init(const Relation& rel, std::size_t r_items, unsigned bits, Arena& a, std::uint32_t s);
  std::size_t fanout() const { return std::size_t{1} << bits_after; }
  std::size_t pairs_per_block() const { return (block_bytes - sizeof(PartBlock)) / 8; }
};

// Executes one step over items [a, b). OpenMP-parallel above a small grain.
void run_build_step(StepId s, BuildCtx& ctx, DeviceLocal& dev, std::size_t a, std::size_t b);
void run_probe_step(StepId s, ProbeCtx& ctx, DeviceLocal& dev, std::size_t a, std::size_t b);
void run_partition_step(StepId s, PartitionPassCtx& ctx, DeviceLocal& dev, std::size_t a,
                        std::size_t b);

// Gathers a finished pass into partition order (rids ascending inside each
// partition). Returns the relation plus partition offsets for R and S.
struct FlatPartitions {
  Relation tuples;
  std::vector<std::size_t> r_offsets;  // fanout + 1
  std::vector<std::size_t> s_offsets;  // fanout + 1, relative to the S run start
};
FlatPartitions flatten_partitions(const PartitionPassCtx& ctx);

std::size_t partition_arena_bytes(std::size_t items, std::size_t fanout, std::size_t block_bytes,
                                  std::size_t block_size, int workers);
std::size_t table_arena_bytes(std::size_t tuples, std::size_t block_size, int workers);

}  // namespace hjcp
