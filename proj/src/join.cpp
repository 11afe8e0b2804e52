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

#include "hjcp/join.hpp"

#include <algorithm>

#include "hjcp/hashtable.hpp"
#include "hjcp/partition.hpp"

namespace hjcp {

JoinResult shj_serial(const Relation& r, const Relation& s, std::uint32_t seed) {
  Arena arena(table_arena_bytes(r.size(), kDefaultBlockSize, 1));
  WorkGroupAllocator alloc(arena, kDefaultBlockSize);
  HashTable table(next_pow2(r.size()), arena, seed);
  for (std::size_t i = 0; i < r.size(); ++i) table.insert(r.keys[i], r.rids[i], alloc);
  JoinResult out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::uint32_t node = table.find_key(table.bucket_of(s.keys[i]), s.keys[i]);
    if (node != kNone) table.for_each_rid(node, [&](std::uint32_t rid) { out.push_back({rid, s.rids[i]}); });
  }
  return out;
}

JoinResult phj_serial(const Relation& r, const Relation& s, unsigned pass_bits, unsigned passes,
                      std::uint32_t seed) {
  const auto pr = radix_partition(r, pass_bits, passes, seed);
  const auto ps = radix_partition(s, pass_bits, passes, seed);
  JoinResult out;
  for (std::size_t p = 0; p < pr.partitions(); ++p) {
    const auto rk = pr.keys(p);
    const auto rr = pr.rids(p);
    Arena arena(table_arena_bytes(rk.size() + 1, kDefaultBlockSize, 1));
    WorkGroupAllocator alloc(arena, kDefaultBlockSize);
    HashTable table(next_pow2(rk.size()), arena, seed ^ 0x5bd1e995U);
    for (std::size_t i = 0; i < rk.size(); ++i) table.insert(rk[i], rr[i], alloc);
    const auto sk = ps.keys(p);
    const auto sr = ps.rids(p);
    for (std::size_t i = 0; i < sk.size(); ++i) {
      const std::uint32_t node = table.find_key(table.bucket_of(sk[i]), sk[i]);
      if (node != kNone) table.for_each_rid(node, [&](std::uint32_t rid) { out.push_back({rid, sr[i]}); });
    }
  }
  return out;
}

JoinResult nested_loop_join(const Relation& r, const Relation& s) {
  JoinResult out;
  constexpr std::size_t kBlock = 64;
  const std::size_t n = r.size();
  const std::uint32_t* rk = r.keys.data();
  for (std::size_t j = 0; j < s.size(); ++j) {
    const std::uint32_t key = s.keys[j];
    std::size_t i = 0;
    for (; i + kBlock <= n; i += kBlock) {
      unsigned hit = 0;
      for (std::size_t t = 0; t < kBlock; ++t) hit |= rk[i + t] == key;
      if (!hit) continue;
      for (std::size_t t = i; t < i + kBlock; ++t) {
        if (rk[t] == key) out.push_back({r.rids[t], s.rids[j]});
      }
    }
    for (; i < n; ++i) {
      if (rk[i] == key) out.push_back({r.rids[i], s.rids[j]});
    }
  }
  return out;
}

namespace {

std::vector<std::pair<std::uint32_t, std::uint32_t>> sorted_by_key(const Relation& rel) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> v(rel.size());
  for (std::size_t i = 0; i < rel.size(); ++i) v[i] = {rel.keys[i], rel.rids[i]};
  std::sort(v.begin(), v.end());
  return v;
}

template <class F>
void merge_equal_runs(const Relation& r, const Relation& s, F&& f) {
  const auto a = sorted_by_key(r);
  const auto b = sorted_by_key(s);
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      const std::uint32_t k = a[i].first;
      std::size_t i2 = i, j2 = j;
      while (i2 < a.size() && a[i2].first == k) ++i2;
      while (j2 < b.size() && b[j2].first == k) ++j2;
      f(a, b, i, i2, j, j2);
      i = i2;
      j = j2;
    }
  }
}

}  // namespace

JoinResult sort_join_oracle(const Relation& r, const Relation& s) {
  JoinResult out;
  merge_equal_runs(r, s, [&](const auto& a, const auto& b, std::size_t i, std::size_t i2,
                             std::size_t j, std::size_t j2) {
    for (std::size_t x = i; x < i2; ++x) {
      for (std::size_t y = j; y < j2; ++y) out.push_back({a[x].second, b[y].second});
    }
  });
  return out;
}

std::size_t join_count_oracle(const Relation& r, const Relation& s) {
  std::size_t n = 0;
  merge_equal_runs(r, s, [&](const auto&, const auto&, std::size_t i, std::size_t i2, std::size_t j,
                             std::size_t j2) { n += (i2 - i) * (j2 - j); });
  return n;
}

void canonicalize(JoinResult& res) { std::sort(res.begin(), res.end()); }

bool same_multiset(JoinResult a, JoinResult b) {
  if (a.size() != b.size()) return false;
  canonicalize(a);
  canonicalize(b);
  return a == b;
}

}  // namespace hjcp
