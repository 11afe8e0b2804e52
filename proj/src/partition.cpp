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

#include "hjcp/partition.hpp"

#include <stdexcept>

namespace hjcp {

namespace {

Relation concat(const Relation& a, const Relation& b) {
  Relation out;
  out.reserve(a.size() + b.size());
  out.rids = a.rids;
  out.keys = a.keys;
  out.rids.insert(out.rids.end(), b.rids.begin(), b.rids.end());
  out.keys.insert(out.keys.end(), b.keys.begin(), b.keys.end());
  return out;
}

}  // namespace

PartitionedPair split_flat(FlatPartitions&& flat, std::size_t r_size, unsigned pass_bits,
                           unsigned passes) {
  PartitionedPair out;
  out.r.pass_bits = out.s.pass_bits = pass_bits;
  out.r.passes = out.s.passes = passes;
  out.r.offsets = std::move(flat.r_offsets);
  out.s.offsets = std::move(flat.s_offsets);
  auto& t = flat.tuples;
  out.r.tuples.rids.assign(t.rids.begin(), t.rids.begin() + static_cast<std::ptrdiff_t>(r_size));
  out.r.tuples.keys.assign(t.keys.begin(), t.keys.begin() + static_cast<std::ptrdiff_t>(r_size));
  out.s.tuples.rids.assign(t.rids.begin() + static_cast<std::ptrdiff_t>(r_size), t.rids.end());
  out.s.tuples.keys.assign(t.keys.begin() + static_cast<std::ptrdiff_t>(r_size), t.keys.end());
  return out;
}

PartitionedPair radix_partition_pair(const Relation& r, const Relation& s, unsigned pass_bits,
                                     unsigned passes, std::uint32_t seed,
                                     std::size_t block_size) {
  if (pass_bits * passes > 24) throw std::invalid_argument("pass_bits * passes must be <= 24");
  if (passes == 0 || pass_bits == 0) {
    PartitionedPair out;
    out.r = PartitionSet{pass_bits, passes, r, {0, r.size()}};
    out.s = PartitionSet{pass_bits, passes, s, {0, s.size()}};
    return out;
  }
  Relation cur = concat(r, s);
  FlatPartitions flat;
  DeviceLocal dev(0, block_size);
  for (unsigned p = 0; p < passes; ++p) {
    const unsigned bits = pass_bits * (p + 1);
    PartitionPassCtx ctx;
    Arena arena(partition_arena_bytes(cur.size(), std::size_t{1} << bits, ctx.block_bytes,
                                      block_size, dev.workers()));
    dev = DeviceLocal(0, block_size);
    ctx.init(cur, r.size(), bits, arena, seed);
    for (StepId st : kPartitionSeries) run_partition_step(st, ctx, dev, 0, cur.size());
    flat = flatten_partitions(ctx);
    cur = flat.tuples;
  }
  return split_flat(std::move(flat), r.size(), pass_bits, passes);
}

PartitionSet radix_partition(const Relation& rel, unsigned pass_bits, unsigned passes,
                             std::uint32_t seed, std::size_t block_size) {
  return radix_partition_pair(rel, Relation{}, pass_bits, passes, seed, block_size).r;
}

}  // namespace hjcp
