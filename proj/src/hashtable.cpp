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

#include "hjcp/hashtable.hpp"

#include <bit>
#include <stdexcept>

namespace hjcp {

std::size_t next_pow2(std::size_t n) { return n <= 1 ? 1 : std::bit_ceil(n); }

BucketMap BucketMap::simple(std::size_t num_buckets) {
  if (num_buckets == 0 || !std::has_single_bit(num_buckets) || num_buckets > (1ULL << 32)) {
    throw std::invalid_argument("bucket count must be a power of two");
  }
  return BucketMap{static_cast<std::uint32_t>(num_buckets - 1), 0, 0};
}

BucketMap BucketMap::partitioned(std::size_t num_buckets, unsigned radix_bits) {
  BucketMap m = simple(num_buckets);
  if (radix_bits == 0) return m;
  const unsigned total = static_cast<unsigned>(std::countr_zero(num_buckets));
  if (total < radix_bits) throw std::invalid_argument("fewer buckets than partitions");
  m.radix_bits = radix_bits;
  m.local_bits = total - radix_bits;
  return m;
}

HashTable::HashTable(BucketMap map, Arena& arena, std::uint32_t seed)
    : map_(map), arena_(&arena), seed_(seed), buckets_(map.size()) {}

std::uint32_t HashTable::find_key_from(std::uint32_t head, std::uint32_t key) const {
  for (std::uint32_t k = head; k != kNone; k = key_node(k).next) {
    if (key_node(k).key == key) return k;
  }
  return kNone;
}

std::vector<std::uint32_t> HashTable::lookup(std::uint32_t key) const {
  std::vector<std::uint32_t> out;
  const std::uint32_t node = find_key(bucket_of(key), key);
  if (node != kNone) for_each_rid(node, [&](std::uint32_t rid) { out.push_back(rid); });
  return out;
}

std::size_t HashTable::tuple_count() const {
  std::size_t n = 0;
  for (const BucketHeader& h : buckets_) n += h.count.load(std::memory_order_relaxed);
  return n;
}

std::size_t HashTable::bytes() const {
  std::size_t keys = 0;
  for (const BucketHeader& h : buckets_) keys += h.key_count.load(std::memory_order_relaxed);
  return buckets_.size() * sizeof(BucketHeader) + keys * sizeof(KeyNode) +
         tuple_count() * sizeof(RidNode);
}

void HashTable::clear() {
  for (BucketHeader& h : buckets_) {
    h.count.store(0, std::memory_order_relaxed);
    h.key_count.store(0, std::memory_order_relaxed);
    h.key_head.store(kNone, std::memory_order_relaxed);
  }
}

void ht_merge(HashTable& dst, HashTable& src, WorkGroupAllocator& dst_alloc) {
  if (&dst == &src) throw std::invalid_argument("ht_merge: dst and src are the same table");
  if (!(dst.map() == src.map()) || dst.seed() != src.seed()) {
    throw std::invalid_argument("ht_merge: tables differ in bucket layout or hash seed");
  }
  for (std::uint32_t b = 0; b < src.num_buckets(); ++b) {
    for (std::uint32_t k = src.bucket(b).key_head.load(std::memory_order_acquire); k != kNone;
         k = src.key_node(k).next) {
      const std::uint32_t node = dst.find_or_create_key(b, src.key_node(k).key, dst_alloc);
      src.for_each_rid(k, [&](std::uint32_t rid) { dst.append_rid(b, node, rid, dst_alloc); });
    }
  }
  src.clear();
}

}  // namespace hjcp
