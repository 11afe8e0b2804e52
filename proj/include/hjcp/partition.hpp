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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hjcp/allocator.hpp"
#include "hjcp/kernels.hpp"
#include "hjcp/murmur.hpp"
#include "hjcp/relation.hpp"

namespace hjcp {

struct PartitionSet {
  unsigned pass_bits = 0;
  unsigned passes = 0;
  Relation tuples;                   // partition-major, rids ascending within a partition
  std::vector<std::size_t> offsets;  // P + 1

  std::size_t partitions() const { return offsets.size() - 1; }
  std::size_t size(std::size_t p) const { return offsets[p + 1] - offsets[p]; }
  std::span<const std::uint32_t> keys(std::size_t p) const {
    return {tuples.keys.data() + offsets[p], size(p)};
  }
  std::span<const std::uint32_t> rids(std::size_t p) const {
    return {tuples.rids.data() + offsets[p], size(p)};
  }
};

constexpr std::uint32_t partition_of(std::uint32_t key, unsigned bits, std::uint32_t seed) {
  return bits == 0 ? 0 : murmur2(key, seed) & ((1U << bits) - 1U);
}

// Multi-pass radix partitioning by the low pass_bits*passes bits of the hash.
// Each pass is a full N1..N3 series followed by a barrier.
PartitionSet radix_partition(const Relation& rel, unsigned pass_bits, unsigned passes,
                             std::uint32_t seed = kDefaultHashSeed,
                             std::size_t block_size = kDefaultBlockSize);

// Both inputs partitioned within the same passes (R run, then S run).
struct PartitionedPair {
  PartitionSet r;
  PartitionSet s;
};
PartitionedPair radix_partition_pair(const Relation& r, const Relation& s, unsigned pass_bits,
                                     unsigned passes, std::uint32_t seed = kDefaultHashSeed,
                                     std::size_t block_size = kDefaultBlockSize);

// Splits a flattened R+S pass output back into the two partition sets.
PartitionedPair split_flat(FlatPartitions&& flat, std::size_t r_size, unsigned pass_bits,
                           unsigned passes);

}  // namespace hjcp
