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

#include <doctest.h>

#include <algorithm>
#include <map>
#include <thread>
#include <vector>

#include "hjcp/hashtable.hpp"
#include "hjcp/kernels.hpp"
#include "hjcp/relation.hpp"

using namespace hjcp;

namespace {

using Multimap = std::map<std::uint32_t, std::vector<std::uint32_t>>;

Multimap reference(const Relation& r) {
  Multimap m;
  for (std::size_t i = 0; i < r.size(); ++i) m[r.keys[i]].push_back(r.rids[i]);
  for (auto& [k, v] : m) std::sort(v.begin(), v.end());
  return m;
}

Multimap contents(const HashTable& t) {
  Multimap m;
  t.for_each_pair([&](std::uint32_t key, std::uint32_t rid) { m[key].push_back(rid); });
  for (auto& [k, v] : m) std::sort(v.begin(), v.end());
  return m;
}

}  // namespace

TEST_CASE("next_pow2") {
  CHECK(next_pow2(0) == 1);
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(5) == 8);
  CHECK(next_pow2(1024) == 1024);
}

TEST_CASE("node layouts") {
  CHECK(sizeof(KeyNode) == 16);
  CHECK(sizeof(RidNode) == 8);
}

TEST_CASE("inserted pairs come back through lookup and iteration") {
  const Relation r = gen_skewed(5000, 25, 8);
  Arena arena(table_arena_bytes(r.size(), 2048, 1));
  WorkGroupAllocator alloc(arena, 2048);
  HashTable t(next_pow2(r.size()), arena);
  for (std::size_t i = 0; i < r.size(); ++i) t.insert(r.keys[i], r.rids[i], alloc);
  CHECK(t.tuple_count() == r.size());
  const auto ref = reference(r);
  CHECK(contents(t) == ref);
  for (const auto& [k, rids] : ref) {
    auto got = t.lookup(k);
    std::sort(got.begin(), got.end());
    REQUIRE(got == rids);
  }
  CHECK(t.lookup(0xfffffff1).empty() == (ref.count(0xfffffff1) == 0));
  // key_count counts distinct keys per bucket.
  std::size_t keys = 0;
  for (std::uint32_t b = 0; b < t.num_buckets(); ++b) keys += t.bucket(b).key_count.load();
  CHECK(keys == ref.size());
}

TEST_CASE("concurrent inserts under bucket latches lose nothing") {
  const Relation r = gen_uniform(40000, KeyRange{0, 5000}, 13);
  Arena arena(table_arena_bytes(r.size(), 512, 8));
  HashTable t(1024, arena);
  std::vector<std::thread> pool;
  for (int w = 0; w < 8; ++w) {
    pool.emplace_back([&, w] {
      WorkGroupAllocator alloc(arena, 512);
      for (std::size_t i = w; i < r.size(); i += 8) t.insert(r.keys[i], r.rids[i], alloc);
    });
  }
  for (auto& th : pool) th.join();
  CHECK(contents(t) == reference(r));
}

TEST_CASE("merge moves every pair and empties the source") {
  const Relation r = gen_skewed(3000, 25, 2);
  Arena a1(table_arena_bytes(r.size(), 2048, 2)), a2(table_arena_bytes(r.size(), 2048, 2));
  WorkGroupAllocator w1(a1, 2048), w2(a2, 2048);
  HashTable t1(BucketMap::partitioned(4096, 3), a1), t2(BucketMap::partitioned(4096, 3), a2);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i % 3 == 0) t2.insert(r.keys[i], r.rids[i], w2);
    else t1.insert(r.keys[i], r.rids[i], w1);
  }
  ht_merge(t1, t2, w1);
  CHECK(t2.tuple_count() == 0);
  CHECK(contents(t1) == reference(r));

  HashTable other(2048, a2);
  CHECK_THROWS_AS(ht_merge(t1, other, w1), std::invalid_argument);
}

TEST_CASE("clear empties the table") {
  Arena arena(1 << 16);
  WorkGroupAllocator alloc(arena, 256);
  HashTable t(64, arena);
  t.insert(1, 1, alloc);
  t.insert(1, 2, alloc);
  CHECK(t.tuple_count() == 2);
  t.clear();
  CHECK(t.tuple_count() == 0);
  CHECK(t.lookup(1).empty());
}
