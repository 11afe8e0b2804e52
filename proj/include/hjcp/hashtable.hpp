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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

#include "hjcp/allocator.hpp"
#include "hjcp/murmur.hpp"

namespace hjcp {

inline constexpr std::uint32_t kNone = 0xffffffffU;

enum class TableMode { Shared, Separate };

struct BucketHeader {
  std::atomic<std::uint32_t> latch{0};
  std::atomic<std::uint32_t> count{0};
  std::atomic<std::uint32_t> key_count{0};
  std::atomic<std::uint32_t> key_head{kNone};
};

struct KeyNode {
  std::uint32_t key;
  std::uint32_t rid_head;
  std::uint32_t next;
  std::uint32_t rid_count;
};
static_assert(sizeof(KeyNode) == 16);

struct RidNode {
  std::uint32_t rid;
  std::uint32_t next;
};
static_assert(sizeof(RidNode) == 8);

std::size_t next_pow2(std::size_t n);

// Maps a hash value to a bucket. With radix_bits == 0 it is a plain mask;
// otherwise the low radix_bits select a partition and the next higher bits
// pick one of that partition's private buckets.
struct BucketMap {
  std::uint32_t mask = 0;
  unsigned radix_bits = 0;
  unsigned local_bits = 0;

  static BucketMap simple(std::size_t num_buckets);
  static BucketMap partitioned(std::size_t num_buckets, unsigned radix_bits);

  std::size_t size() const { return std::size_t{mask} + 1; }
  std::uint32_t operator()(std::uint32_t h) const {
    if (radix_bits == 0) return h & mask;
    const std::uint32_t part = h & ((1U << radix_bits) - 1U);
    const std::uint32_t local = (h >> radix_bits) & ((1U << local_bits) - 1U);
    return (part << local_bits) | local;
  }
  bool operator==(const BucketMap&) const = default;
};

class SpinLatch {
 public:
  explicit SpinLatch(std::atomic<std::uint32_t>& word) : word_(word) {
    for (unsigned spins = 0; word_.exchange(1, std::memory_order_acquire) != 0;) {
      while (word_.load(std::memory_order_relaxed) != 0) {
        if (++spins % 64 == 0) std::this_thread::yield();
      }
    }
  }
  ~SpinLatch() { word_.store(0, std::memory_order_release); }
  SpinLatch(const SpinLatch&) = delete;
  SpinLatch& operator=(const SpinLatch&) = delete;

 private:
  std::atomic<std::uint32_t>& word_;
};

// Bucket headers -> key lists -> rid lists, with nodes addressed by offsets
// into an arena. Inserts are latched per bucket; lookups assume the build
// phase is over.
class HashTable {
 public:
  HashTable(BucketMap map, Arena& arena, std::uint32_t seed = kDefaultHashSeed);
  HashTable(std::size_t num_buckets, Arena& arena, std::uint32_t seed = kDefaultHashSeed)
      : HashTable(BucketMap::simple(num_buckets), arena, seed) {}

  std::size_t num_buckets() const { return buckets_.size(); }
  const BucketMap& map() const { return map_; }
  std::uint32_t seed() const { return seed_; }
  Arena& arena() { return *arena_; }

  std::uint32_t bucket_of(std::uint32_t key) const { return map_(murmur2(key, seed_)); }
  BucketHeader& bucket(std::uint32_t b) { return buckets_[b]; }
  const BucketHeader& bucket(std::uint32_t b) const { return buckets_[b]; }

  KeyNode& key_node(std::uint32_t off) { return *arena_->at<KeyNode>(off); }
  const KeyNode& key_node(std::uint32_t off) const { return *arena_->at<KeyNode>(off); }
  const RidNode& rid_node(std::uint32_t off) const { return *arena_->at<RidNode>(off); }

  // Finds the key node in bucket b or creates it. Holds the bucket latch.
  template <class Alloc>
  std::uint32_t find_or_create_key(std::uint32_t b, std::uint32_t key, Alloc& alloc);
  // Pushes rid onto a key node's rid list. Holds the bucket latch.
  template <class Alloc>
  void append_rid(std::uint32_t b, std::uint32_t node, std::uint32_t rid, Alloc& alloc);

  // Walks a key list starting at head; kNone when the key is absent.
  std::uint32_t find_key_from(std::uint32_t head, std::uint32_t key) const;
  std::uint32_t find_key(std::uint32_t b, std::uint32_t key) const {
    return find_key_from(buckets_[b].key_head.load(std::memory_order_acquire), key);
  }

  template <class F>
  void for_each_rid(std::uint32_t node, F&& f) const {
    for (std::uint32_t r = key_node(node).rid_head; r != kNone; r = rid_node(r).next) {
      f(rid_node(r).rid);
    }
  }
  template <class F>
  void for_each_pair(F&& f) const;

  template <class Alloc>
  void insert(std::uint32_t key, std::uint32_t rid, Alloc& alloc) {
    const std::uint32_t b = bucket_of(key);
    append_rid(b, find_or_create_key(b, key, alloc), rid, alloc);
  }
  std::vector<std::uint32_t> lookup(std::uint32_t key) const;

  std::size_t tuple_count() const;
  // Approximate footprint: headers plus nodes.
  std::size_t bytes() const;

  // Empties the table; does not reset the arena.
  void clear();

 private:
  BucketMap map_;
  Arena* arena_;
  std::uint32_t seed_;
  std::vector<BucketHeader> buckets_;
};

// Moves every (key, rid) of src into dst and clears src.
void ht_merge(HashTable& dst, HashTable& src, WorkGroupAllocator& dst_alloc);

template <class Alloc>
std::uint32_t HashTable::find_or_create_key(std::uint32_t b, std::uint32_t key, Alloc& alloc) {
  BucketHeader& h = buckets_[b];
  SpinLatch latch(h.latch);
  const std::uint32_t head = h.key_head.load(std::memory_order_relaxed);
  if (std::uint32_t hit = find_key_from(head, key); hit != kNone) return hit;
  const std::uint32_t off = alloc.alloc(sizeof(KeyNode));
  KeyNode& n = key_node(off);
  n.key = key;
  n.rid_head = kNone;
  n.next = head;
  n.rid_count = 0;
  h.key_head.store(off, std::memory_order_release);
  h.key_count.fetch_add(1, std::memory_order_relaxed);
  return off;
}

template <class Alloc>
void HashTable::append_rid(std::uint32_t b, std::uint32_t node, std::uint32_t rid, Alloc& alloc) {
  BucketHeader& h = buckets_[b];
  const std::uint32_t off = alloc.alloc(sizeof(RidNode));
  SpinLatch latch(h.latch);
  KeyNode& k = key_node(node);
  RidNode& r = *arena_->at<RidNode>(off);
  r.rid = rid;
  r.next = k.rid_head;
  k.rid_head = off;
  ++k.rid_count;
  h.count.fetch_add(1, std::memory_order_relaxed);
}

template <class F>
void HashTable::for_each_pair(F&& f) const {
  for (const BucketHeader& h : buckets_) {
    for (std::uint32_t k = h.key_head.load(std::memory_order_acquire); k != kNone;
         k = key_node(k).next) {
      const std::uint32_t key = key_node(k).key;
      for_each_rid(k, [&](std::uint32_t rid) { f(key, rid); });
    }
  }
}

}  // namespace hjcp
