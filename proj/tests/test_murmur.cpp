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

#include <cmath>
#include <cstring>
#include <vector>

#include "hjcp/hashtable.hpp"
#include "hjcp/murmur.hpp"
#include "hjcp/relation.hpp"

using namespace hjcp;

namespace {

// Byte-oriented MurmurHash2 as published, fed the key's little-endian bytes.
std::uint32_t ref_murmur2(const unsigned char* data, int len, std::uint32_t seed) {
  const std::uint32_t m = 0x5bd1e995;
  const int r = 24;
  std::uint32_t h = seed ^ static_cast<std::uint32_t>(len);
  while (len >= 4) {
    std::uint32_t k = data[0] | (data[1] << 8) | (data[2] << 16) | (static_cast<std::uint32_t>(data[3]) << 24);
    k *= m;
    k ^= k >> r;
    k *= m;
    h *= m;
    h ^= k;
    data += 4;
    len -= 4;
  }
  h ^= h >> 13;
  h *= m;
  h ^= h >> 15;
  return h;
}

std::uint32_t ref_key(std::uint32_t key, std::uint32_t seed) {
  const unsigned char b[4] = {static_cast<unsigned char>(key), static_cast<unsigned char>(key >> 8),
                              static_cast<unsigned char>(key >> 16), static_cast<unsigned char>(key >> 24)};
  return ref_murmur2(b, 4, seed);
}

}  // namespace

TEST_CASE("murmur2 agrees with the byte-wise reference") {
  CHECK(murmur2(0, 0) == ref_key(0, 0));
  CHECK(murmur2(1, 0) == ref_key(1, 0));
  CHECK(murmur2(0xdeadbeef, kDefaultHashSeed) == ref_key(0xdeadbeef, kDefaultHashSeed));
  SplitMix64 g(5);
  for (int i = 0; i < 10000; ++i) {
    const auto k = static_cast<std::uint32_t>(g.next());
    const auto s = static_cast<std::uint32_t>(g.next());
    REQUIRE(murmur2(k, s) == ref_key(k, s));
  }
  static_assert(murmur2(7, 7) == murmur2(7, 7));
}

TEST_CASE("bucket occupancy passes a chi-square uniformity check") {
  constexpr std::size_t buckets = 1024;
  constexpr std::size_t n = 1 << 18;
  for (bool sequential : {true, false}) {
    std::vector<double> count(buckets, 0.0);
    SplitMix64 g(9);
    const BucketMap map = BucketMap::simple(buckets);
    for (std::size_t i = 0; i < n; ++i) {
      const auto key = sequential ? static_cast<std::uint32_t>(i) : static_cast<std::uint32_t>(g.next());
      count[map(murmur2(key, kDefaultHashSeed))] += 1.0;
    }
    const double e = static_cast<double>(n) / buckets;
    double chi2 = 0.0;
    for (double c : count) chi2 += (c - e) * (c - e) / e;
    // 1023 degrees of freedom: mean 1023, sd ~45; 5 sd margin.
    CHECK(chi2 < 1023 + 5 * 45.2);
  }
}

TEST_CASE("partitioned bucket map keeps the partition in the high bits") {
  const BucketMap m = BucketMap::partitioned(1 << 10, 4);
  CHECK(m.size() == 1 << 10);
  SplitMix64 g(3);
  for (int i = 0; i < 1000; ++i) {
    const auto h = static_cast<std::uint32_t>(g.next());
    const std::uint32_t b = m(h);
    REQUIRE(b < (1U << 10));
    REQUIRE((b >> 6) == (h & 15U));
  }
}
